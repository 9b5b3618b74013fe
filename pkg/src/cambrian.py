"""Cambrian lattices A_U(n), the Tamari lattice A(n) and bracket functions.

A_U(n) consists of the transitive pair sets x such that whenever (i, k) is in
x and i < j < k, then (i, j) is in x if j is in U and (j, k) is in x if j is
not. It is a sublattice and a retract of P(n); the retraction pi_U sends a
clopen set to the largest element of A_U(n) below it. The Tamari lattice is
A(n) = A_[n](n).
"""

import itertools
import logging
import time
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Optional

import numpy as np

from config import DEFAULT_DENSE_LIMIT, DEFAULT_TABLE_LIMIT
from errors import (
    BadParamsError,
    LatticeForgeError,
    NotABracketFunctionError,
    NotInTamariError,
    NotSubsemilatticeError,
    SizeLimitError,
)
from lattice import (
    Congruence,
    FiniteLattice,
    LatticeMap,
    congruence_generated,
    dual,
    find_isomorphism,
    join_dependency,
    product,
    verify_embedding,
)
from weak_order import JiTriple, PairSet, build_permutohedron, closure, restrict, triple_set

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CambrianSpec:
    """Ground size n and the interior part of U (1 and n are dropped).

    Raises:
        BadParamsError: If U has an index outside 1..n.
    """

    n: int
    u: frozenset[int]

    def __post_init__(self) -> None:
        outside = sorted(x for x in self.u if not 1 <= x <= self.n)
        if outside:
            raise BadParamsError(f"U indices {outside} are outside 1..{self.n}")
        object.__setattr__(self, "u", frozenset(x for x in self.u if 1 < x < self.n))

    @classmethod
    def of(cls, n: int, u: Iterable[int] = ()) -> "CambrianSpec":
        return cls(n, frozenset(u))

    @property
    def complement(self) -> "CambrianSpec":
        """The spec of A_{[n] \\ U}(n)."""
        return CambrianSpec(self.n, frozenset(range(2, self.n)) - self.u)

    def __str__(self) -> str:
        return f"A_{{{','.join(map(str, sorted(self.u)))}}}({self.n})"


def tamari(n: int) -> CambrianSpec:
    return CambrianSpec.of(n, range(1, n + 1))


def all_specs(n: int) -> list[CambrianSpec]:
    """Every normalized U for ground size n, smallest subsets first."""
    inner = list(range(2, n))
    return [
        CambrianSpec.of(n, subset)
        for size in range(len(inner) + 1)
        for subset in itertools.combinations(inner, size)
    ]


def in_du(spec: CambrianSpec, x: PairSet) -> bool:
    rows = x.rows()
    for i in range(1, spec.n + 1):
        for k in range(i + 2, spec.n + 1):
            if not rows[i] >> k & 1:
                continue
            for j in range(i + 1, k):
                if j in spec.u:
                    if not rows[i] >> j & 1:
                        return False
                elif not rows[j] >> k & 1:
                    return False
    return True


def in_au(spec: CambrianSpec, x: PairSet) -> bool:
    return in_du(spec, x) and x.is_closed()


def ji_element(spec: CambrianSpec, i: int, j: int) -> PairSet:
    """<i, j>_U: the least element of A_U(n) containing (i, j)."""
    return triple_set(JiTriple(spec.n, i, j, restrict(spec.u, i, j)))


@lru_cache(maxsize=None)
def ji_elements(spec: CambrianSpec) -> tuple[tuple[tuple[int, int], PairSet], ...]:
    return tuple(
        ((i, j), ji_element(spec, i, j))
        for i in range(1, spec.n + 1)
        for j in range(i + 1, spec.n + 1)
    )


def pi_u(spec: CambrianSpec, x: PairSet) -> PairSet:
    """Join of all <i, j>_U contained in x."""
    bits = 0
    for _, g in ji_elements(spec):
        if g <= x:
            bits |= g.bits
    return closure(PairSet(spec.n, bits))


def _meet(x: PairSet, y: PairSet) -> PairSet:
    return x & y


def _join(x: PairSet, y: PairSet) -> PairSet:
    return closure(x | y)


def build_cambrian(
    spec: CambrianSpec,
    max_n: int = 14,
    dense_limit: int = DEFAULT_DENSE_LIMIT,
    table_limit: int = DEFAULT_TABLE_LIMIT,
) -> FiniteLattice:
    """A_U(n) by join-closure of its join-irreducibles, starting from the empty set.

    Elements are ordered by (size, bits). Meet is intersection and join is
    the closure of the union.

    Raises:
        SizeLimitError: If n exceeds max_n.
    """
    n = spec.n
    if not 1 <= n <= max_n:
        raise SizeLimitError(f"{spec} is outside the permitted range 1..{max_n}")
    started = time.monotonic()
    gens = [g for _, g in ji_elements(spec)]
    seen = {PairSet.empty(n)}
    frontier = [PairSet.empty(n)]
    while frontier:
        fresh = []
        for x in frontier:
            for g in gens:
                if g <= x:
                    continue
                y = closure(x | g)
                if y not in seen:
                    seen.add(y)
                    fresh.append(y)
        frontier = fresh
    elements = sorted(seen, key=lambda s: (len(s), s.bits))
    names = [str(x) for x in elements]
    logger.info(f"Built {spec}: {len(elements)} elements in {time.monotonic() - started:.2f}s")

    if len(elements) <= dense_limit:
        bits = np.array([s.bits for s in elements], dtype=np.uint64)
        order = (bits[:, None] & ~bits[None, :]) == 0
        return FiniteLattice(
            order, names=names, elements=elements, validate=False, table_limit=table_limit
        )

    index = {x: k for k, x in enumerate(elements)}
    covers = []
    for k, x in enumerate(elements):
        above = {closure(x | g) for g in gens if not g <= x}
        for y in above:
            if not any(z != y and z <= y for z in above):
                covers.append((k, index[y]))
    return FiniteLattice.from_payloads(
        elements, lambda x, y: x <= y, _meet, _join, covers, names=names
    )


def join_fits(lattice: FiniteLattice, subset: Iterable[int]) -> bool:
    """Whether K join-fits within L: p D_L q implies q in K for p in Ji(K), q in Ji(L).

    Raises:
        NotSubsemilatticeError: If K is not a (join, 0, 1)-subsemilattice of L.
    """
    members = set(subset)
    if lattice.bottom not in members or lattice.top not in members:
        raise NotSubsemilatticeError("subset must contain the bottom and the top")
    for x in members:
        for y in members:
            if lattice.join(x, y) not in members:
                raise NotSubsemilatticeError(
                    f"join of '{lattice.names[x]}' and '{lattice.names[y]}' leaves the subset"
                )
    ji_k = []
    for k in members:
        if k == lattice.bottom:
            continue
        below = [z for z in members if lattice.lt(z, k)]
        if lattice.join_all(below) != k:
            ji_k.append(k)
    dependency = join_dependency(lattice)
    for p, q in dependency:
        if p in ji_k and q not in members:
            return False
    return True


def projection(spec: CambrianSpec, permutohedron: FiniteLattice, cambrian: FiniteLattice) -> LatticeMap:
    """pi_U as a map between built lattices."""
    images = tuple(cambrian.index_of(pi_u(spec, x)) for x in permutohedron.elements)
    return LatticeMap(permutohedron, cambrian, images)


def subdirect_decomposition(
    n: int, permutohedron: Optional[FiniteLattice] = None
) -> list[tuple[CambrianSpec, LatticeMap]]:
    """P(n) -> A_U(n) for every normalized U.

    Raises:
        SizeLimitError: If n > 6.
    """
    if n > 6:
        raise SizeLimitError(f"subdirect decomposition is limited to n <= 6, got {n}")
    perm = permutohedron or build_permutohedron(n)
    return [(spec, projection(spec, perm, build_cambrian(spec))) for spec in all_specs(n)]


def diagonal_is_injective(decomposition: list[tuple[CambrianSpec, LatticeMap]]) -> bool:
    columns = list(zip(*(m.images for _, m in decomposition)))
    return len(set(columns)) == len(columns)


def kernel_pi_u(spec: CambrianSpec, permutohedron: Optional[FiniteLattice] = None) -> Congruence:
    """Ker pi_U as a congruence of P(n).

    Raises:
        SizeLimitError: If n > 6.
    """
    if spec.n > 6:
        raise SizeLimitError(f"kernel computation is limited to n <= 6, got {spec.n}")
    perm = permutohedron or build_permutohedron(spec.n)
    roots = [perm.index_of(pi_u(spec, x)) for x in perm.elements]
    return Congruence.from_representatives(perm, roots)


def cambrian_generator_pairs(spec: CambrianSpec) -> list[tuple[PairSet, PairSet]]:
    """The pairs of P(n) that generate the Cambrian congruence of U."""
    n = spec.n
    pairs = []
    for i in range(1, n - 1):
        if i + 1 in spec.u:
            low = PairSet.from_pairs(n, [(i + 1, i + 2)])
            high = PairSet.from_pairs(n, [(i + 1, i + 2), (i, i + 2)])
        else:
            low = PairSet.from_pairs(n, [(i, i + 1)])
            high = PairSet.from_pairs(n, [(i, i + 1), (i, i + 2)])
        pairs.append((low, high))
    return pairs


def cambrian_congruence(spec: CambrianSpec, permutohedron: FiniteLattice) -> Congruence:
    pairs = [
        (permutohedron.index_of(x), permutohedron.index_of(y))
        for x, y in cambrian_generator_pairs(spec)
    ]
    return congruence_generated(permutohedron, pairs)


def top_triple(spec: CambrianSpec) -> JiTriple:
    """(1, n, U') with U' = U normalized plus n, so that <1, n; U'> = <1, n>_U."""
    return JiTriple(spec.n, 1, spec.n, restrict(spec.u, 1, spec.n))


def cambrian_duality(spec: CambrianSpec, verify_up_to: int = 6) -> LatticeMap:
    """A_U(n) -> dual(A_{[n] \\ U}(n)), x -> pi_{[n] \\ U}(complement of x).

    The map is checked to be an isomorphism when n <= verify_up_to.

    Raises:
        SizeLimitError: If n > 10.
    """
    if spec.n > 10:
        raise SizeLimitError(f"duality map is limited to n <= 10, got {spec.n}")
    source = build_cambrian(spec)
    other = spec.complement
    target = dual(build_cambrian(other))
    images = tuple(target.index_of(pi_u(other, ~x)) for x in source.elements)
    mapping = LatticeMap(source, target, images)
    if spec.n <= verify_up_to and not (verify_embedding(mapping) and mapping.is_surjective()):
        raise LatticeForgeError(f"complement map does not dualize {spec}")
    return mapping


# -- bracket functions --------------------------------------------------------


@dataclass(frozen=True)
class BracketFunction:
    """A map f: [n] -> [n] with i <= f(i) and f(j) <= f(i) whenever i <= j <= f(i).

    values[k] holds f(k + 1).
    """

    values: tuple[int, ...]

    def __post_init__(self) -> None:
        n = len(self.values)
        for i in range(1, n + 1):
            fi = self(i)
            if not i <= fi <= n:
                raise NotABracketFunctionError(f"f({i}) = {fi} is outside [{i}, {n}]")
            for j in range(i, fi + 1):
                if self(j) > fi:
                    raise NotABracketFunctionError(
                        f"f({j}) = {self(j)} exceeds f({i}) = {fi} although {i} <= {j} <= f({i})"
                    )

    @property
    def n(self) -> int:
        return len(self.values)

    def __call__(self, i: int) -> int:
        return self.values[i - 1]

    def __le__(self, other: "BracketFunction") -> bool:
        return all(a <= b for a, b in zip(self.values, other.values))


def to_bracket(x: PairSet) -> BracketFunction:
    """f(i) = the largest j with {i} x ]i, j] inside x.

    Raises:
        NotInTamariError: If x is not an element of A(n).
    """
    if not in_au(tamari(x.n), x):
        raise NotInTamariError(f"{x} is not an element of A({x.n})")
    values = []
    for i in range(1, x.n + 1):
        j = i
        while j < x.n and (i, j + 1) in x:
            j += 1
        values.append(j)
    return BracketFunction(tuple(values))


def from_bracket(f: BracketFunction) -> PairSet:
    return PairSet.from_pairs(
        f.n, ((i, j) for i in range(1, f.n + 1) for j in range(i + 1, f(i) + 1))
    )


def bracket_dual(f: BracketFunction) -> BracketFunction:
    """g(i) = least j in [i, n] with n - i < f(n - j), where f(0) = n."""
    n = f.n

    def extended(k: int) -> int:
        return n if k == 0 else f(k)

    values = []
    for i in range(1, n + 1):
        values.append(next(j for j in range(i, n + 1) if n - i < extended(n - j)))
    return BracketFunction(tuple(values))


def enumerate_brackets(n: int) -> list[BracketFunction]:
    """All bracket functions on [n], in lexicographic order of values."""
    results: list[tuple[int, ...]] = []

    def extend(i: int, tail: tuple[int, ...]) -> None:
        # tail holds f(i + 1), ..., f(n)
        if i == 0:
            results.append(tail)
            return
        for fi in range(i, n + 1):
            if all(tail[j - i - 1] <= fi for j in range(i + 1, fi + 1)):
                extend(i - 1, (fi,) + tail)

    extend(n, ())
    return [BracketFunction(v) for v in sorted(results)]


def build_bracket_lattice(n: int) -> FiniteLattice:
    """A'(n): bracket functions ordered pointwise.

    Raises:
        SizeLimitError: If n > 7.
    """
    if not 1 <= n <= 7:
        raise SizeLimitError(f"bracket lattice is limited to 1 <= n <= 7, got {n}")
    functions = enumerate_brackets(n)
    values = np.array([f.values for f in functions])
    order = (values[:, None, :] <= values[None, :, :]).all(axis=2)
    names = [",".join(map(str, f.values)) for f in functions]
    return FiniteLattice(order, names=names, elements=functions)


# -- Tamari embeddings ---------------------------------------------------------


def three_generators(n: int) -> tuple[PairSet, PairSet, PairSet]:
    """(a_n, b_n, c_n): <1, n>, the even and the odd adjacent pairs."""
    if n < 2:
        raise ValueError("three generators need n >= 2")
    a = ji_element(tamari(n), 1, n)
    b = PairSet.from_pairs(n, ((i, i + 1) for i in range(2, n, 2)))
    c = PairSet.from_pairs(n, ((i, i + 1) for i in range(1, n, 2)))
    return a, b, c


def closure_under(
    values: Iterable[PairSet],
    meet_: Callable[[PairSet, PairSet], PairSet] = _meet,
    join_: Callable[[PairSet, PairSet], PairSet] = _join,
) -> frozenset[PairSet]:
    """Sublattice generated by PairSet values without building the lattice."""
    closed: set[PairSet] = set()
    frontier = list(dict.fromkeys(values))
    while frontier:
        current = list(closed) + frontier
        closed.update(frontier)
        fresh = set()
        for x in frontier:
            for y in current:
                for z in (meet_(x, y), join_(x, y)):
                    if z not in closed:
                        fresh.add(z)
        frontier = sorted(fresh, key=lambda s: s.bits)
    return frozenset(closed)


def three_generated_size(n: int) -> int:
    return len(closure_under(three_generators(n)))


def tamari_product_embed(m: int, n: int) -> LatticeMap:
    """A(m) x A(n) -> A(m + n), (x, y) -> x ∪ (y shifted by m).

    Raises:
        SizeLimitError: If m + n > 8 or either side is below 1.
    """
    if m < 1 or n < 1 or m + n > 8:
        raise SizeLimitError(f"product embedding needs 1 <= m, n and m + n <= 8, got {m}, {n}")
    left, right = build_cambrian(tamari(m)), build_cambrian(tamari(n))
    source = product(left, right)
    target = build_cambrian(tamari(m + n))
    images = []
    for x, y in source.elements:
        lifted = PairSet.from_pairs(m + n, x.pairs()) | y.shifted(m, m + n)
        images.append(target.index_of(lifted))
    return LatticeMap(source, target, tuple(images))


def permutohedron3_into_tamari6() -> LatticeMap:
    """P(3) -> A_{2}(3) x A_∅(3) ≅ A(3) x A(3) -> A(6)."""
    perm = build_permutohedron(3)
    factors = {spec: projection(spec, perm, build_cambrian(spec)) for spec in all_specs(3)}
    tam, other = tamari(3), CambrianSpec.of(3)
    to_tamari = find_isomorphism(factors[other].target, factors[tam].target)
    if to_tamari is None:
        raise NotInTamariError("A_∅(3) is not isomorphic to A(3)")
    product_map = tamari_product_embed(3, 3)
    width = factors[tam].target.size
    images = []
    for x in range(perm.size):
        left = factors[tam](x)
        right = to_tamari(factors[other](x))
        images.append(product_map(left * width + right))
    return LatticeMap(perm, product_map.target, tuple(images))
