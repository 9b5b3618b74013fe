import random
from multiprocessing import Value

import pytest

from cambrian import CambrianSpec, build_cambrian, tamari
from errors import (
    BudgetExceededError,
    GeneratorsDontGenerateError,
    LatticeForgeError,
    NotMeetHomError,
    NotPolarizedError,
    NotSubdirectlyIrreducibleError,
)
from lattice import LatticeMap, boolean_lattice, chain, m3, verify_embedding
from measures import (
    COUNTER_BATCH,
    PolarizedMeasure,
    _plan,
    _Search,
    bm0_embedding,
    bm1_measure,
    bm2_measure,
    cambrian_measure,
    canonical_generators,
    embedding_from_measure,
    find_polarity_violation,
    generator_embedding_search,
    hom_properties,
    hom_to_measure,
    is_polarized,
    measure_to_hom,
    random_dual_pair,
    satisfies_V,
    si_embedding_scan,
    tamari_measure,
)
from reproduce import catalan


def chain_measure(u, v12, v23, v13):
    return PolarizedMeasure((1, 2, 3), frozenset(u), chain(2), {(1, 2): v12, (2, 3): v23, (1, 3): v13})


class TestPolarity:
    def test_triangle_violation(self):
        mu = chain_measure((), 0, 0, 1)
        assert find_polarity_violation(mu) == ("triangle", (1, 2, 3))

    def test_polarity_violation(self):
        mu = chain_measure({2}, 1, 0, 0)
        assert find_polarity_violation(mu) == ("polarity", (1, 2, 3))
        with pytest.raises(NotPolarizedError) as info:
            measure_to_hom(mu)
        assert info.value.triple == (1, 2, 3)

    def test_missing_value(self):
        with pytest.raises(LatticeForgeError):
            PolarizedMeasure((1, 2, 3), frozenset(), chain(2), {(1, 2): 0})

    def test_tamari_measure(self):
        mu = tamari_measure(4)
        assert is_polarized(mu)
        assert satisfies_V(mu)
        assert mu.spec() == tamari(4)


class TestDuality:
    def test_tamari_measure_induces_an_isomorphism(self):
        mu = tamari_measure(4)
        phi = measure_to_hom(mu)
        assert phi.is_surjective() and verify_embedding(phi)
        props = hom_properties(mu, phi)
        assert props.zero_empty and props.injective and props.lattice_hom

    def test_round_trip(self):
        mu = tamari_measure(3)
        back = hom_to_measure(measure_to_hom(mu), mu.spec())
        assert back.agrees_with(mu)

    def test_random_pairs_are_dual(self, pentagon):
        rng = random.Random(7)
        spec = CambrianSpec.of(3, {2})
        cambrian = build_cambrian(spec)
        for _ in range(20):
            mu, phi = random_dual_pair(spec, pentagon, rng, cambrian)
            assert measure_to_hom(mu, cambrian).images == phi.images
            hom_properties(mu, phi)

    def test_measure_into_permutohedron_does_not_generate(self):
        mu = cambrian_measure(CambrianSpec.of(3), ambient="permutohedron")
        assert not hom_properties(mu, measure_to_hom(mu)).injective
        with pytest.raises(LatticeForgeError):
            cambrian_measure(CambrianSpec.of(3), ambient="nowhere")

    def test_top_must_be_preserved(self):
        cambrian = build_cambrian(tamari(3))
        with pytest.raises(NotMeetHomError):
            hom_to_measure(LatticeMap(chain(2), cambrian, (0, 0)), tamari(3))


class TestBmnEmbeddings:
    @pytest.mark.parametrize("m", [1, 2, 3])
    def test_bm1(self, m):
        phi = embedding_from_measure(bm1_measure(m))
        assert phi.target.size == catalan(m + 2)

    @pytest.mark.parametrize("m", [1, 2])
    def test_bm0(self, m):
        assert verify_embedding(bm0_embedding(m))

    @pytest.mark.parametrize("m", [1, 2])
    def test_bm2(self, m):
        mu = bm2_measure(m)
        assert mu.spec() == CambrianSpec.of(2 * m + 2, range(m + 2, 2 * m + 2))
        assert is_polarized(mu) and satisfies_V(mu)
        assert verify_embedding(embedding_from_measure(mu))


class TestSearch:
    def test_canonical_generators(self, three_chain):
        assert canonical_generators(boolean_lattice(2)) == [1, 2]
        assert canonical_generators(three_chain) == [0, 1, 2]

    def test_least_embedding(self, three_chain):
        mapping = generator_embedding_search(three_chain, boolean_lattice(2))
        assert mapping.images == (0, 1, 3)

    def test_parallel_search_agrees(self, three_chain):
        mapping = generator_embedding_search(three_chain, boolean_lattice(2), parallel=True, threads=2)
        assert mapping.images == (0, 1, 3)

    def test_no_embedding(self):
        assert generator_embedding_search(m3(), build_cambrian(tamari(3))) is None

    def test_generators_must_generate(self, three_chain):
        with pytest.raises(GeneratorsDontGenerateError):
            generator_embedding_search(three_chain, boolean_lattice(2), generators=[1])

    def test_scan_finds_pentagon(self, pentagon):
        found = si_embedding_scan(pentagon, 3)
        assert found is not None
        spec, mapping = found
        assert spec.n == 3
        assert verify_embedding(mapping)

    def test_scan_needs_subdirectly_irreducible(self, square):
        with pytest.raises(NotSubdirectlyIrreducibleError):
            si_embedding_scan(square, 3)

    @pytest.mark.slow
    def test_b22_avoids_p4(self, b22):
        assert si_embedding_scan(b22.lattice, 4) is None

    @pytest.mark.slow
    def test_b22_reaches_a45_6(self, b22):
        target = build_cambrian(CambrianSpec.of(6, {4, 5}))
        mapping = generator_embedding_search(b22.lattice, target)
        assert mapping is not None
        assert verify_embedding(mapping)


class TestSearchBudget:
    @pytest.mark.parametrize("parallel", [False, True])
    def test_tiny_budget_raises(self, pentagon, parallel):
        target = build_cambrian(tamari(4))
        with pytest.raises(BudgetExceededError):
            generator_embedding_search(pentagon, target, budget=1, parallel=parallel, threads=2)

    def test_generous_budget_finds_embedding(self, pentagon):
        target = build_cambrian(tamari(4))
        assert generator_embedding_search(pentagon, target, budget=10**6) is not None

    def test_shards_share_one_counter(self, pentagon):
        plan = _plan(pentagon, build_cambrian(tamari(4)), canonical_generators(pentagon))
        counter = Value("q", 0)
        budget = COUNTER_BATCH + COUNTER_BATCH // 2
        first = _Search(plan, budget, counter)
        second = _Search(plan, budget, counter)
        for _ in range(COUNTER_BATCH):
            first.visit()
        assert counter.value == COUNTER_BATCH
        with pytest.raises(BudgetExceededError):
            for _ in range(COUNTER_BATCH):
                second.visit()
        assert counter.value == 2 * COUNTER_BATCH

    def test_serial_search_counts_alone(self, pentagon):
        plan = _plan(pentagon, build_cambrian(tamari(4)), canonical_generators(pentagon))
        search = _Search(plan, COUNTER_BATCH)
        for _ in range(COUNTER_BATCH):
            search.visit()
        with pytest.raises(BudgetExceededError):
            search.visit()
