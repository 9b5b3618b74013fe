"""Polarized measures on chains and lattice embeddings into Cambrian lattices.

A measure mu assigns an element of a target lattice L to every pair x < y
of a finite chain P. It is U-polarized when

    mu(x, z) <= mu(x, y) ∨ mu(y, z)
    mu(x, y) <= mu(x, z)  if y is in U
    mu(y, z) <= mu(x, z)  if y is not in U

for all x < y < z. Such measures on a chain with n labels correspond to maps
phi: L -> A_U(n) preserving meets and the top, through

    (x, y) in phi(a)  iff  mu(x, y) <= a.

phi is one-to-one iff the values of mu generate L under joins, and a
lattice homomorphism iff mu satisfies the subdivision condition checked by
satisfies_V. Measures built here therefore yield explicit embeddings of
B(m, n) lattices into Tamari and Cambrian lattices.
"""

import logging
import random
import time
from dataclasses import dataclass, field
from multiprocessing import Pool, Value
from typing import Any, Iterable, Optional, Sequence

import numpy as np

from bmn import build_bmn
from cambrian import CambrianSpec, all_specs, build_cambrian, ji_elements, pi_u, tamari
from config import DEFAULT_SEARCH_BUDGET
from errors import (
    BudgetExceededError,
    DualityViolatedError,
    GeneratorsDontGenerateError,
    LatticeForgeError,
    NotMeetHomError,
    NotPolarizedError,
    NotSubdirectlyIrreducibleError,
)
from lattice import (
    FiniteLattice,
    LatticeMap,
    is_subdirectly_irreducible,
    sublattice_closure,
    verify_embedding,
)
from weak_order import PairSet, build_permutohedron, closure

logger = logging.getLogger(__name__)

COUNTER_BATCH = 256


@dataclass
class PolarizedMeasure:
    """Values on the strict pairs of a chain; mu(z, z) is the bottom of the target.

    Raises:
        LatticeForgeError: If a strict pair has no value.
    """

    chain: tuple[int, ...]
    u: frozenset[int]
    target: FiniteLattice
    values: dict[tuple[int, int], int]

    def __post_init__(self) -> None:
        self.chain = tuple(self.chain)
        self.u = frozenset(self.u)
        for i, x in enumerate(self.chain):
            for y in self.chain[i + 1:]:
                if (x, y) not in self.values:
                    raise LatticeForgeError(f"measure has no value on ({x}, {y})")

    def __call__(self, x: int, y: int) -> int:
        if x == y:
            return self.target.bottom
        return self.values[(x, y)]

    @property
    def length(self) -> int:
        return len(self.chain)

    def matrix(self) -> np.ndarray:
        """Values by chain position; the diagonal and lower part hold the bottom."""
        k = self.length
        result = np.full((k, k), self.target.bottom, dtype=np.int64)
        for i in range(k):
            for j in range(i + 1, k):
                result[i, j] = self.values[(self.chain[i], self.chain[j])]
        return result

    def spec(self) -> CambrianSpec:
        """The Cambrian spec after relabeling the chain as 1..n in order."""
        return CambrianSpec.of(
            self.length, (i + 1 for i, x in enumerate(self.chain) if x in self.u)
        )

    def positional(self) -> dict[tuple[int, int], int]:
        """Values keyed by 1-based chain positions."""
        return {
            (i + 1, j + 1): self.values[(self.chain[i], self.chain[j])]
            for i in range(self.length)
            for j in range(i + 1, self.length)
        }

    def agrees_with(self, other: "PolarizedMeasure") -> bool:
        return (
            self.target is other.target
            and self.spec() == other.spec()
            and self.positional() == other.positional()
        )

    def describe(self) -> list[str]:
        names = self.target.names
        return [f"mu({x},{y}) = {names[v]}" for (x, y), v in sorted(self.values.items())]


# -- polarity and the subdivision condition ------------------------------------


def find_polarity_violation(mu: PolarizedMeasure) -> Optional[tuple[str, tuple[int, int, int]]]:
    """The first violated condition, as ("triangle" | "polarity", (x, y, z)), or None."""
    lat = mu.target
    chain = mu.chain
    for i, x in enumerate(chain):
        for j in range(i + 1, len(chain)):
            y = chain[j]
            for z in chain[j + 1:]:
                xz = mu(x, z)
                if not lat.leq(xz, lat.join(mu(x, y), mu(y, z))):
                    return "triangle", (x, y, z)
                if y in mu.u:
                    if not lat.leq(mu(x, y), xz):
                        return "polarity", (x, y, z)
                elif not lat.leq(mu(y, z), xz):
                    return "polarity", (x, y, z)
    return None


def is_polarized(mu: PolarizedMeasure) -> bool:
    return find_polarity_violation(mu) is None


def find_v_violation(mu: PolarizedMeasure) -> Optional[tuple[int, int, int, int]]:
    """(x, y, a, b) with mu(x, y) <= a ∨ b but no subdivision of [x, y] stepping under a or b."""
    lat = mu.target
    order = lat.order
    _, join = lat.operation_tables()
    values = mu.matrix()
    k = mu.length
    upper = np.triu(np.ones((k, k), dtype=bool), 1)
    for a in range(lat.size):
        for b in range(a, lat.size):
            need = order[values, join[a, b]] & upper
            if not need.any():
                continue
            good = (order[values, a] | order[values, b]) & upper
            reach = np.zeros((k, k), dtype=bool)
            for j in range(k):
                reach[:, j] = good[:, j] | (reach[:, :j] & good[:j, j]).any(axis=1)
            missing = need & ~reach
            if missing.any():
                i, j = (int(v) for v in np.argwhere(missing)[0])
                return mu.chain[i], mu.chain[j], a, b
    return None


def satisfies_V(mu: PolarizedMeasure) -> bool:
    return find_v_violation(mu) is None


# -- measures and meet homomorphisms ------------------------------------------


def measure_to_hom(mu: PolarizedMeasure, cambrian: Optional[FiniteLattice] = None) -> LatticeMap:
    """phi: L -> A_U(n), phi(a) = {(x, y) : mu(x, y) <= a} over chain positions.

    Raises:
        NotPolarizedError: If mu is not U-polarized.
    """
    violation = find_polarity_violation(mu)
    if violation is not None:
        kind, triple = violation
        raise NotPolarizedError(f"{kind} condition fails at {triple}", triple=triple)
    spec = mu.spec()
    cambrian = cambrian or build_cambrian(spec)
    positional = mu.positional()
    images = []
    for a in range(mu.target.size):
        pairs = [pair for pair, v in positional.items() if mu.target.leq(v, a)]
        images.append(cambrian.index_of(PairSet.from_pairs(spec.n, pairs)))
    return LatticeMap(mu.target, cambrian, tuple(images))


def _check_meet_hom(phi: LatticeMap) -> None:
    source, target = phi.source, phi.target
    if phi(source.top) != target.top:
        raise NotMeetHomError("map does not send the top to the top")
    for x in range(source.size):
        for y in range(x + 1, source.size):
            if phi(source.meet(x, y)) != target.meet(phi(x), phi(y)):
                raise NotMeetHomError(
                    f"map does not preserve the meet of '{source.names[x]}' and '{source.names[y]}'"
                )


def hom_to_measure(
    phi: LatticeMap, spec: CambrianSpec, chain: Optional[Sequence[int]] = None
) -> PolarizedMeasure:
    """mu(x, y) = least a with (x, y) in phi(a).

    The chain defaults to 1..n; a custom chain relabels positions in order.

    Raises:
        NotMeetHomError: If phi does not preserve meets and the top.
    """
    _check_meet_hom(phi)
    source = phi.source
    sets = [phi.target.elements[phi(a)] for a in range(source.size)]
    labels = tuple(chain) if chain is not None else tuple(range(1, spec.n + 1))
    if len(labels) != spec.n:
        raise LatticeForgeError(f"chain has {len(labels)} labels for n = {spec.n}")
    values = {}
    for i in range(1, spec.n + 1):
        for j in range(i + 1, spec.n + 1):
            holders = [a for a in range(source.size) if (i, j) in sets[a]]
            values[(labels[i - 1], labels[j - 1])] = source.meet_all(holders)
    u = {labels[i - 1] for i in spec.u}
    return PolarizedMeasure(labels, frozenset(u), source, values)


@dataclass
class HomProperties:
    zero_empty: bool
    injective: bool
    lattice_hom: bool


def measure_properties(mu: PolarizedMeasure) -> HomProperties:
    lat = mu.target
    range_ = set(mu.values.values())
    generated = {lat.bottom} | range_
    frontier = list(generated)
    while frontier:
        x = frontier.pop()
        for y in list(generated):
            z = lat.join(x, y)
            if z not in generated:
                generated.add(z)
                frontier.append(z)
    return HomProperties(
        zero_empty=lat.bottom not in range_,
        injective=len(generated) == lat.size,
        lattice_hom=satisfies_V(mu),
    )


def map_properties(phi: LatticeMap) -> HomProperties:
    source, target = phi.source, phi.target
    images = np.asarray(phi.images)
    _, s_join = source.operation_tables()
    _, t_join = target.operation_tables()
    preserves = bool((images[s_join] == t_join[np.ix_(images, images)]).all())
    return HomProperties(
        zero_empty=len(target.elements[phi(source.bottom)]) == 0,
        injective=phi.is_injective(),
        lattice_hom=preserves,
    )


def hom_properties(mu: PolarizedMeasure, phi: LatticeMap) -> HomProperties:
    """Evaluate both sides independently.

    Raises:
        DualityViolatedError: If the measure side and the map side disagree.
    """
    left = measure_properties(mu)
    right = map_properties(phi)
    if left != right:
        raise DualityViolatedError(f"measure side {left} disagrees with map side {right}")
    return left


# -- example measures -------------------------------------------------------------


def cambrian_measure(spec: CambrianSpec, ambient: str = "cambrian") -> PolarizedMeasure:
    """mu(x, y) = <x, y>_U, valued in A_U(n) or in P(n) (ambient="permutohedron")."""
    if ambient == "cambrian":
        target = build_cambrian(spec)
    elif ambient == "permutohedron":
        target = build_permutohedron(spec.n)
    else:
        raise LatticeForgeError(f"unknown ambient lattice {ambient!r}")
    values = {pair: target.index_of(g) for pair, g in ji_elements(spec)}
    return PolarizedMeasure(tuple(range(1, spec.n + 1)), spec.u, target, values)


def tamari_measure(n: int) -> PolarizedMeasure:
    return cambrian_measure(tamari(n))


def bm1_measure(m: int) -> PolarizedMeasure:
    """The measure on [m+2] valued in B(m, 1) inducing B(m, 1) -> A(m+2)."""
    if m < 1:
        raise LatticeForgeError(f"m must be at least 1, got {m}")
    bmn = build_bmn(m, 1)
    values = _bm1_values(m, bmn.p, b_bit=m)
    return PolarizedMeasure(tuple(range(1, m + 3)), frozenset(range(1, m + 3)), bmn.lattice, values)


def _a_interval(k: int, l: int) -> int:
    """Mask of a_k .. a_l (empty when l < k)."""
    return sum(1 << (i - 1) for i in range(k, l + 1))


def _bm1_values(m: int, p: int, b_bit: int, shift: int = 0) -> dict[tuple[int, int], int]:
    values = {}
    for k in range(1, m + 2):
        for l in range(k + 1, m + 2):
            values[(k - shift, l - shift)] = _a_interval(k, l - 1)
    for k in range(2, m + 2):
        values[(k - shift, m + 2 - shift)] = _a_interval(k, m) | 1 << b_bit
    values[(1 - shift, m + 2 - shift)] = p
    return values


def bm2_measure(m: int) -> PolarizedMeasure:
    """The measure on [-m-1, m+1] \\ {0} with U = [1, m] valued in B(m, 2).

    The positive half copies the B(m, 1) measure through b_1, the negative
    half mirrors it through b_2, and nu(-i, j) = mu(0, min(i, j)).
    """
    if m < 1:
        raise LatticeForgeError(f"m must be at least 1, got {m}")
    bmn = build_bmn(m, 2)
    mu = _bm1_values(m, bmn.p, b_bit=m, shift=1)
    mu_prime = _bm1_values(m, bmn.p, b_bit=m + 1, shift=1)
    values = {}
    for i in range(1, m + 2):
        for j in range(i + 1, m + 2):
            values[(i, j)] = mu[(i, j)]
            values[(-j, -i)] = mu_prime[(i, j)]
    for i in range(1, m + 2):
        for j in range(1, m + 2):
            values[(-i, j)] = mu[(0, min(i, j))]
    chain = tuple(range(-m - 1, 0)) + tuple(range(1, m + 2))
    return PolarizedMeasure(chain, frozenset(range(1, m + 1)), bmn.lattice, values)


def embedding_from_measure(mu: PolarizedMeasure) -> LatticeMap:
    """The induced map, checked to be a lattice embedding.

    Raises:
        LatticeForgeError: If the induced map is not an embedding.
    """
    phi = measure_to_hom(mu)
    if not verify_embedding(phi):
        raise LatticeForgeError(f"measure does not induce an embedding into {mu.spec()}")
    return phi


def bm0_embedding(m: int) -> LatticeMap:
    """B(m, 0) -> A(m+2) through B(m, 0) ⊆ B(m, 1)."""
    small = build_bmn(m, 0)
    mu = bm1_measure(m)
    big_p = mu.target.size - 1
    inclusion = LatticeMap(
        small.lattice, mu.target,
        tuple(big_p if z == small.p else z for z in range(small.lattice.size)),
    )
    return inclusion.then(embedding_from_measure(mu))


def random_dual_pair(
    spec: CambrianSpec,
    target: FiniteLattice,
    rng: random.Random,
    cambrian: Optional[FiniteLattice] = None,
) -> tuple[PolarizedMeasure, LatticeMap]:
    """A random (∧,1)-homomorphism L -> A_U(n) and its measure.

    Random values g on pairs are made subadditive along the chain; then
    a -> {(x, y) : g(x, y) <= a} is a closed set, and taking the largest
    element of A_U(n) inside it gives a meet homomorphism.
    """
    n = spec.n
    g = {(x, y): rng.randrange(target.size) for x in range(1, n + 1) for y in range(x + 1, n + 1)}
    for span in range(2, n):
        for x in range(1, n - span + 1):
            z = x + span
            for y in range(x + 1, z):
                g[(x, z)] = target.meet(g[(x, z)], target.join(g[(x, y)], g[(y, z)]))
    cambrian = cambrian or build_cambrian(spec)
    images = []
    for a in range(target.size):
        below = PairSet.from_pairs(n, [pair for pair, v in g.items() if target.leq(v, a)])
        images.append(cambrian.index_of(pi_u(spec, closure(below))))
    phi = LatticeMap(target, cambrian, tuple(images))
    return hom_to_measure(phi, spec), phi


# -- embedding search ---------------------------------------------------------------


def canonical_generators(lattice: FiniteLattice) -> list[int]:
    """The atoms when they generate L, else Ji(L), plus the bottom when it is not generated."""
    atoms = list(lattice.upper_covers[lattice.bottom])
    if atoms and len(sublattice_closure(lattice, atoms)) == lattice.size:
        return atoms
    gens = list(lattice.ji)
    if lattice.bottom not in sublattice_closure(lattice, gens):
        gens = [lattice.bottom] + gens
    return gens


@dataclass
class _SearchPlan:
    """Elements in derivation order, with the prefix boundaries per generator."""

    source: FiniteLattice
    target: FiniteLattice
    generators: list[int]
    steps: list[tuple[str, int, int, int]] = field(default_factory=list)
    stage_end: list[int] = field(default_factory=list)


def _plan(source: FiniteLattice, target: FiniteLattice, generators: Sequence[int]) -> _SearchPlan:
    plan = _SearchPlan(source, target, list(generators))
    known: list[int] = []
    seen: set[int] = set()
    for k, g in enumerate(generators):
        if g not in seen:
            plan.steps.append(("gen", g, k, -1))
            known.append(g)
            seen.add(g)
        grew = True
        while grew:
            grew = False
            for x in list(known):
                for y in list(known):
                    for op, z in (("meet", source.meet(x, y)), ("join", source.join(x, y))):
                        if z not in seen:
                            plan.steps.append((op, z, x, y))
                            known.append(z)
                            seen.add(z)
                            grew = True
        plan.stage_end.append(len(plan.steps))
    return plan


class _Search:
    """Backtracking over generator images.

    Visited nodes count against budget. Parallel shards share one counter,
    flushed every COUNTER_BATCH nodes, so the budget caps the whole search.
    """

    def __init__(self, plan: _SearchPlan, budget: int, counter: Optional[Any] = None) -> None:
        self.plan = plan
        self.budget = budget
        self.counter = counter
        self.nodes = 0
        self.pending = 0
        self.shared = 0
        source, target = plan.source, plan.target
        self.s_order = source.order
        self.s_meet, self.s_join = source.operation_tables()
        self.t_order = target.order
        self.t_meet, self.t_join = target.operation_tables()
        self.image = np.full(source.size, -1, dtype=np.int64)

    def consistent(self, done: int) -> bool:
        members = np.array([step[1] for step in self.plan.steps[:done]])
        imgs = self.image[members]
        if len(set(imgs.tolist())) != len(imgs):
            return False
        if not (self.s_order[np.ix_(members, members)] == self.t_order[np.ix_(imgs, imgs)]).all():
            return False
        for s_table, t_table in ((self.s_meet, self.t_meet), (self.s_join, self.t_join)):
            if not (self.image[s_table[np.ix_(members, members)]] == t_table[np.ix_(imgs, imgs)]).all():
                return False
        return True

    def flush(self) -> None:
        if self.counter is None or not self.pending:
            return
        with self.counter.get_lock():
            self.counter.value += self.pending
            self.shared = self.counter.value
        self.pending = 0

    def visit(self) -> None:
        self.nodes += 1
        self.pending += 1
        if self.pending >= COUNTER_BATCH:
            self.flush()
        if self.shared + self.pending > self.budget:
            raise BudgetExceededError(f"embedding search visited more than {self.budget} nodes")

    def run(self, stage: int, start: int, first: Optional[int] = None) -> bool:
        plan = self.plan
        if stage == len(plan.generators):
            return True
        end = plan.stage_end[stage]
        has_choice = start < end and plan.steps[start][0] == "gen"
        if first is not None and stage == 0:
            candidates: Iterable[Optional[int]] = [first]
        elif has_choice:
            candidates = range(plan.target.size)
        else:
            candidates = [None]
        for candidate in candidates:
            self.visit()
            for index in range(start, end):
                op, z, x, y = plan.steps[index]
                if op == "gen":
                    self.image[z] = candidate
                elif op == "meet":
                    self.image[z] = self.t_meet[self.image[x], self.image[y]]
                else:
                    self.image[z] = self.t_join[self.image[x], self.image[y]]
            if self.consistent(end) and self.run(stage + 1, end):
                return True
            for index in range(start, end):
                self.image[plan.steps[index][1]] = -1
        return False


_WORKER_PLAN: Optional[tuple[_SearchPlan, int, Any]] = None


def _init_search_worker(plan: _SearchPlan, budget: int, counter: Any) -> None:
    global _WORKER_PLAN
    _WORKER_PLAN = (plan, budget, counter)


def _search_shard(first: int) -> Optional[tuple[int, ...]]:
    plan, budget, counter = _WORKER_PLAN
    search = _Search(plan, budget, counter)
    try:
        found = search.run(0, 0, first)
    finally:
        search.flush()
    if found:
        return tuple(int(v) for v in search.image)
    return None


def generator_embedding_search(
    source: FiniteLattice,
    target: FiniteLattice,
    generators: Optional[Sequence[int]] = None,
    budget: int = DEFAULT_SEARCH_BUDGET,
    parallel: bool = False,
    threads: int = 1,
) -> Optional[LatticeMap]:
    """The lexicographically least embedding by generator images, or None.

    Raises:
        GeneratorsDontGenerateError: If the generators do not generate the source.
        BudgetExceededError: If more than budget search nodes are visited, summed
            over all shards in parallel mode.
    """
    gens = list(generators) if generators is not None else canonical_generators(source)
    if len(sublattice_closure(source, gens)) != source.size:
        raise GeneratorsDontGenerateError(
            f"{len(gens)} generators do not generate the {source.size}-element lattice"
        )
    if source.size > target.size:
        return None
    plan = _plan(source, target, gens)
    images: Optional[tuple[int, ...]] = None
    if parallel and threads > 1:
        counter = Value("q", 0)
        with Pool(threads, initializer=_init_search_worker, initargs=(plan, budget, counter)) as pool:
            for result in pool.imap(_search_shard, range(target.size)):
                if result is not None:
                    images = result
                    break
    else:
        search = _Search(plan, budget)
        if search.run(0, 0):
            images = tuple(int(v) for v in search.image)
    if images is None:
        return None
    mapping = LatticeMap(source, target, images)
    if not verify_embedding(mapping):
        raise LatticeForgeError("search produced a map that is not an embedding")
    return mapping


def si_embedding_scan(
    source: FiniteLattice,
    n: int,
    budget: int = DEFAULT_SEARCH_BUDGET,
    parallel: bool = False,
    threads: int = 1,
) -> Optional[tuple[CambrianSpec, LatticeMap]]:
    """Search every A_U(n); a subdirectly irreducible lattice embeds into P(n) iff one succeeds.

    Raises:
        NotSubdirectlyIrreducibleError: If the source is not subdirectly irreducible.
    """
    if not is_subdirectly_irreducible(source):
        raise NotSubdirectlyIrreducibleError("embedding scan needs a subdirectly irreducible lattice")
    for spec in all_specs(n):
        started = time.monotonic()
        found = generator_embedding_search(
            source, build_cambrian(spec), budget=budget, parallel=parallel, threads=threads
        )
        logger.info(f"{spec}: {'embedding found' if found else 'none'} ({time.monotonic() - started:.2f}s)")
        if found is not None:
            return spec, found
    return None
