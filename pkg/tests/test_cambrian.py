import pytest

from cambrian import (
    BracketFunction,
    CambrianSpec,
    all_specs,
    bracket_dual,
    build_bracket_lattice,
    build_cambrian,
    cambrian_congruence,
    cambrian_duality,
    diagonal_is_injective,
    enumerate_brackets,
    from_bracket,
    in_au,
    ji_element,
    join_fits,
    kernel_pi_u,
    permutohedron3_into_tamari6,
    pi_u,
    subdirect_decomposition,
    tamari,
    tamari_product_embed,
    three_generated_size,
    to_bracket,
)
from errors import BadParamsError, NotABracketFunctionError, NotInTamariError, NotSubsemilatticeError, SizeLimitError
from lattice import is_isomorphic, is_subdirectly_irreducible, minimal_meet_irreducible_congruences, n5, verify_embedding
from reproduce import THREE_GENERATED_SIZES, catalan
from weak_order import PairSet


def pairs(n, *items):
    return PairSet.from_pairs(n, items)


class TestSpecs:
    def test_normalization_drops_ends(self):
        spec = CambrianSpec.of(4, [1, 3, 4])
        assert spec.u == {3}
        assert str(spec) == "A_{3}(4)"
        assert spec.complement == CambrianSpec.of(4, [2])

    def test_tamari_spec(self):
        assert tamari(4) == CambrianSpec.of(4, [2, 3])

    @pytest.mark.parametrize("u", [[0], [5], [2, 9]])
    def test_indices_outside_ground_are_rejected(self, u):
        with pytest.raises(BadParamsError):
            CambrianSpec.of(4, u)

    def test_all_specs(self):
        assert [sorted(s.u) for s in all_specs(4)] == [[], [2], [3], [2, 3]]


class TestCambrianLattices:
    @pytest.mark.parametrize("n", range(1, 7))
    def test_tamari_sizes_are_catalan(self, n):
        assert build_cambrian(tamari(n)).size == catalan(n)

    def test_every_a_u_4_has_14_elements(self):
        for spec in all_specs(4):
            lattice = build_cambrian(spec)
            assert lattice.size == 14
            assert is_subdirectly_irreducible(lattice)

    def test_join_irreducible_elements(self):
        spec = CambrianSpec.of(4, {3})
        assert ji_element(spec, 1, 3) == pairs(4, (1, 3), (2, 3))
        assert ji_element(spec, 2, 4) == pairs(4, (2, 3), (2, 4))

    def test_a3_is_a_pentagon(self):
        assert is_isomorphic(build_cambrian(tamari(3)), n5())

    def test_projection_is_idempotent(self, perm4):
        spec = CambrianSpec.of(4, {3})
        for x in perm4.elements:
            y = pi_u(spec, x)
            assert y <= x
            assert in_au(spec, y)
            assert pi_u(spec, y) == y

    def test_size_limit(self):
        with pytest.raises(SizeLimitError):
            build_cambrian(tamari(15))


class TestCongruences:
    def test_kernels_are_generated_by_the_cambrian_pairs(self, perm4):
        for spec in all_specs(4):
            assert kernel_pi_u(spec, perm4) == cambrian_congruence(spec, perm4)

    def test_kernels_are_the_minimal_congruences(self, perm4):
        kernels = {kernel_pi_u(spec, perm4) for spec in all_specs(4)}
        assert set(minimal_meet_irreducible_congruences(perm4)) == kernels

    def test_subdirect_decomposition_is_injective(self, perm4):
        assert diagonal_is_injective(subdirect_decomposition(4, perm4))

    def test_duality_with_complement(self):
        for spec in all_specs(4):
            mapping = cambrian_duality(spec)
            assert mapping.is_surjective()


class TestJoinFits:
    def test_bottom_and_top_do_not_fit_in_b22(self, b22):
        lattice = b22.lattice
        assert not join_fits(lattice, {lattice.bottom, lattice.top})

    def test_whole_lattice_fits(self, b22):
        assert join_fits(b22.lattice, range(b22.lattice.size))

    def test_subset_must_be_a_subsemilattice(self, b22):
        with pytest.raises(NotSubsemilatticeError):
            join_fits(b22.lattice, {b22.lattice.bottom})


class TestBrackets:
    @pytest.mark.parametrize("n", range(1, 6))
    def test_bracket_counts(self, n):
        assert len(enumerate_brackets(n)) == catalan(n)

    def test_bracket_conditions(self):
        with pytest.raises(NotABracketFunctionError):
            BracketFunction((2, 1))
        with pytest.raises(NotABracketFunctionError):
            BracketFunction((2, 3, 3))

    def test_to_bracket(self):
        x = pairs(3, (1, 2), (1, 3))
        assert to_bracket(x).values == (3, 2, 3)
        assert from_bracket(to_bracket(x)) == x
        with pytest.raises(NotInTamariError):
            to_bracket(pairs(3, (1, 3)))

    def test_bracket_lattice_is_tamari(self, tamari4):
        assert is_isomorphic(build_bracket_lattice(4), tamari4)

    def test_dual_is_an_involution(self):
        for f in enumerate_brackets(4):
            assert bracket_dual(bracket_dual(f)) == f


class TestTamariEmbeddings:
    def test_product_embeds(self):
        assert verify_embedding(tamari_product_embed(2, 2))

    def test_p3_into_a6(self):
        mapping = permutohedron3_into_tamari6()
        assert mapping.source.size == 6
        assert verify_embedding(mapping)

    @pytest.mark.parametrize(
        "n",
        [4, 5, 6, 7, pytest.param(8, marks=pytest.mark.slow), pytest.param(9, marks=pytest.mark.slow)],
    )
    def test_three_generated_sizes(self, n):
        assert three_generated_size(n) == THREE_GENERATED_SIZES[n]
