import numpy as np
import pytest

from errors import BadIntervalError, NotACongruenceError, NotALatticeError, NotAPosetError, TrivialLatticeError
from lattice import (
    Congruence,
    FiniteLattice,
    boolean_lattice,
    chain,
    double_interval,
    dual,
    find_isomorphism,
    induced_sublattice,
    is_bounded,
    is_distributive,
    is_isomorphic,
    is_semidistributive,
    is_subdirectly_irreducible,
    join_dependency,
    join_dependency_by_arrows,
    kappa,
    minimal_join_covers,
    monolith,
    product,
    quotient,
    sublattice_closure,
    theta,
    verify_embedding,
)

A, B, C = 1, 2, 3  # pentagon ids: 0 < a < b < 1, 0 < c < 1


class TestConstruction:
    def test_covers_and_irreducibles_of_chain(self, three_chain):
        assert three_chain.covers == ((0, 1), (1, 2))
        assert three_chain.ji == (1, 2)
        assert three_chain.bottom == 0 and three_chain.top == 2

    def test_pentagon_tables(self, pentagon):
        assert pentagon.join(A, C) == 4
        assert pentagon.meet(B, C) == 0
        meet, join = pentagon.operation_tables()
        assert meet.shape == (5, 5)
        assert join[A, B] == B

    def test_cycle_is_not_a_poset(self):
        with pytest.raises(NotAPosetError) as info:
            FiniteLattice.from_order(2, [(0, 1), (1, 0)])
        assert info.value.pair == (0, 1)

    def test_missing_join_is_not_a_lattice(self):
        with pytest.raises(NotALatticeError):
            FiniteLattice.from_order(3, [(0, 1), (0, 2)])

    def test_order_must_be_square(self):
        with pytest.raises(NotAPosetError):
            FiniteLattice(np.ones((2, 3), dtype=bool))


class TestDependency:
    def test_pentagon_join_dependency(self, pentagon):
        on_ji = {(a, q) for a, q in join_dependency(pentagon) if a in pentagon.ji}
        assert on_ji == {(B, A), (B, C)}
        assert (A, C) not in join_dependency(pentagon)

    def test_arrows_agree_on_join_irreducibles(self, pentagon):
        assert join_dependency_by_arrows(pentagon) == {(B, A), (B, C)}

    def test_kappa(self, pentagon, diamond):
        assert kappa(pentagon, A) == C
        assert kappa(pentagon, B) == A
        assert kappa(pentagon, C) == B
        assert kappa(diamond, 1) is None

    def test_minimal_join_covers(self, pentagon, diamond):
        assert minimal_join_covers(diamond, 1) == [frozenset({2, 3})]
        assert minimal_join_covers(pentagon, B) == [frozenset({A, C})]
        assert minimal_join_covers(boolean_lattice(3), 1) == []


class TestProperties:
    def test_bounded(self, pentagon, diamond):
        assert is_bounded(pentagon)
        assert not is_bounded(diamond)

    def test_semidistributive(self, pentagon, diamond):
        assert is_semidistributive(pentagon)
        assert not is_semidistributive(diamond)

    def test_distributive(self, pentagon, square):
        assert is_distributive(square)
        assert not is_distributive(pentagon)

    def test_subdirectly_irreducible(self, pentagon, diamond, square):
        assert is_subdirectly_irreducible(chain(2))
        assert is_subdirectly_irreducible(pentagon)
        assert is_subdirectly_irreducible(diamond)
        assert not is_subdirectly_irreducible(square)
        assert not is_subdirectly_irreducible(chain(3))

    def test_trivial_lattice_has_no_monolith(self):
        with pytest.raises(TrivialLatticeError):
            monolith(chain(1))


class TestCongruences:
    def test_theta_collapses_one_cover(self, three_chain):
        assert theta(three_chain, 1).blocks == ((0, 1), (2,))

    def test_quotient(self, three_chain):
        congruence = Congruence(three_chain, (0, 0, 1))
        result, projection = quotient(three_chain, congruence)
        assert result.size == 2
        assert projection.images == (0, 0, 1)

    def test_incompatible_partition(self, pentagon):
        with pytest.raises(NotACongruenceError):
            quotient(pentagon, Congruence(pentagon, (0, 1, 2, 1, 3)))


class TestConstructions:
    def test_product_of_chains_is_square(self, square):
        assert is_isomorphic(product(chain(2), chain(2)), square)

    def test_pentagon_is_self_dual(self, pentagon):
        assert is_isomorphic(dual(pentagon), pentagon)

    def test_pentagon_and_diamond_differ(self, pentagon, diamond):
        assert find_isomorphism(pentagon, diamond) is None

    def test_double_interval(self, pentagon):
        doubled = double_interval(pentagon, A, B)
        assert doubled.size == 7
        assert "a'" in doubled.names and "b'" in doubled.names
        assert is_bounded(doubled)

    def test_double_needs_an_interval(self, pentagon):
        with pytest.raises(BadIntervalError):
            double_interval(pentagon, B, C)

    def test_atoms_generate_boolean_lattice(self):
        cube = boolean_lattice(3)
        assert sublattice_closure(cube, [1, 2, 4]) == frozenset(range(8))

    def test_induced_sublattice_embeds(self):
        cube = boolean_lattice(3)
        sub, inclusion = induced_sublattice(cube, [0, 1, 2, 3])
        assert sub.size == 4
        assert verify_embedding(inclusion)
