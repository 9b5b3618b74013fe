"""The permutohedron P(n) as clopen subsets of J_n = {(i, j) : 1 <= i < j <= n}.

A PairSet is a subset of J_n stored as a Python int; bit k stands for the
k-th pair of J_n in lexicographic order (1-based indices). The closure of a
pair set is its transitive closure and the interior is the complement of the
closure of the complement. Clopen sets are exactly inversion sets of
permutations and they form P(n) under inclusion.
"""

import itertools
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

import numpy as np

from config import DEFAULT_DENSE_LIMIT, DEFAULT_TABLE_LIMIT
from errors import NotClopenError, NotInFnError, SizeLimitError
from lattice import FiniteLattice, join_dependency, kappa, minimal_join_covers

logger = logging.getLogger(__name__)

Permutation = tuple[int, ...]


@lru_cache(maxsize=None)
def pair_order(n: int) -> tuple[tuple[int, int], ...]:
    """J_n in canonical (lexicographic) order."""
    return tuple((i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1))


@lru_cache(maxsize=None)
def _positions(n: int) -> dict[tuple[int, int], int]:
    return {pair: k for k, pair in enumerate(pair_order(n))}


@dataclass(frozen=True, order=False)
class PairSet:
    """A subset of J_n."""

    n: int
    bits: int

    @classmethod
    def from_pairs(cls, n: int, pairs: Iterable[tuple[int, int]]) -> "PairSet":
        positions = _positions(n)
        bits = 0
        for i, j in pairs:
            try:
                bits |= 1 << positions[(i, j)]
            except KeyError:
                raise ValueError(f"({i}, {j}) is not a pair of J_{n}") from None
        return cls(n, bits)

    @classmethod
    def empty(cls, n: int) -> "PairSet":
        return cls(n, 0)

    @classmethod
    def full(cls, n: int) -> "PairSet":
        return cls(n, (1 << len(pair_order(n))) - 1)

    def pairs(self) -> list[tuple[int, int]]:
        order = pair_order(self.n)
        return [order[k] for k in range(len(order)) if self.bits >> k & 1]

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return iter(self.pairs())

    def __contains__(self, pair: tuple[int, int]) -> bool:
        k = _positions(self.n).get(pair)
        return k is not None and bool(self.bits >> k & 1)

    def __len__(self) -> int:
        return self.bits.bit_count()

    def __and__(self, other: "PairSet") -> "PairSet":
        return PairSet(self.n, self.bits & other.bits)

    def __or__(self, other: "PairSet") -> "PairSet":
        return PairSet(self.n, self.bits | other.bits)

    def __sub__(self, other: "PairSet") -> "PairSet":
        return PairSet(self.n, self.bits & ~other.bits)

    def __invert__(self) -> "PairSet":
        return PairSet(self.n, PairSet.full(self.n).bits & ~self.bits)

    def __le__(self, other: "PairSet") -> bool:
        return self.bits & ~other.bits == 0

    def __lt__(self, other: "PairSet") -> bool:
        return self != other and self <= other

    def __str__(self) -> str:
        return "{" + ",".join(f"({i},{j})" for i, j in self.pairs()) + "}"

    def rows(self) -> list[int]:
        """Successor masks: bit j of rows[i] is set iff (i, j) is in the set."""
        rows = [0] * (self.n + 1)
        for i, j in self.pairs():
            rows[i] |= 1 << j
        return rows

    @classmethod
    def from_rows(cls, n: int, rows: Sequence[int]) -> "PairSet":
        positions = _positions(n)
        bits = 0
        for i in range(1, n + 1):
            row = rows[i]
            for j in range(i + 1, n + 1):
                if row >> j & 1:
                    bits |= 1 << positions[(i, j)]
        return cls(n, bits)

    def is_closed(self) -> bool:
        return closure(self) == self

    def is_open(self) -> bool:
        return (~self).is_closed()

    def is_clopen(self) -> bool:
        return self.is_closed() and self.is_open()

    def shifted(self, offset: int, n: int) -> "PairSet":
        """The same pairs moved up by offset inside J_n."""
        return PairSet.from_pairs(n, ((i + offset, j + offset) for i, j in self.pairs()))


def closure(x: PairSet) -> PairSet:
    """Transitive closure (the closure operator cl)."""
    rows = x.rows()
    n = x.n
    for k in range(1, n + 1):
        row_k = rows[k]
        if not row_k:
            continue
        bit = 1 << k
        for i in range(1, k):
            if rows[i] & bit:
                rows[i] |= row_k
    return PairSet.from_rows(n, rows)


def interior(x: PairSet) -> PairSet:
    """The largest open subset: complement of the closure of the complement."""
    return ~closure(~x)


def meet(x: PairSet, y: PairSet) -> PairSet:
    return interior(x & y)


def join(x: PairSet, y: PairSet) -> PairSet:
    return closure(x | y)


class PairSetAlgebra:
    """Meet and join of P(n) on PairSet values, for term evaluation."""

    def __init__(self, n: int) -> None:
        self.n = n

    def meet(self, x: PairSet, y: PairSet) -> PairSet:
        return meet(x, y)

    def join(self, x: PairSet, y: PairSet) -> PairSet:
        return join(x, y)


def complement(x: PairSet) -> PairSet:
    """J_n minus x; an involutive dual automorphism of P(n).

    Raises:
        NotClopenError: If x is not clopen.
    """
    if not x.is_clopen():
        raise NotClopenError(f"{x} is not clopen")
    return ~x


def inversions(sigma: Permutation) -> PairSet:
    """Pairs (i, j) with i < j whose values appear in reversed order.

    The permutation is given in one-line notation (sigma(1), ..., sigma(n)).
    """
    n = len(sigma)
    position = {value: k for k, value in enumerate(sigma)}
    if sorted(position) != list(range(1, n + 1)):
        raise ValueError(f"{sigma} is not a permutation of 1..{n}")
    return PairSet.from_pairs(
        n, ((i, j) for i, j in pair_order(n) if position[i] > position[j])
    )


def permutation_of(x: PairSet) -> Permutation:
    """The permutation whose inversion set is x.

    Raises:
        NotClopenError: If x is not clopen.
    """
    if not x.is_clopen():
        raise NotClopenError(f"{x} is not clopen")
    n = x.n
    rank = {}
    for v in range(1, n + 1):
        before = sum(1 for w in range(1, v) if (w, v) not in x)
        before += sum(1 for w in range(v + 1, n + 1) if (v, w) in x)
        rank[v] = before
    return tuple(sorted(rank, key=rank.__getitem__))


@dataclass(frozen=True)
class JiTriple:
    """A triple (a, b, U) of F_n indexing the join-irreducible <a, b; U>."""

    n: int
    a: int
    b: int
    u: frozenset[int]

    def __post_init__(self) -> None:
        if not 1 <= self.a < self.b <= self.n:
            raise NotInFnError(f"({self.a}, {self.b}) is not a pair of J_{self.n}")
        if not all(self.a <= x <= self.b for x in self.u):
            raise NotInFnError(f"U = {sorted(self.u)} is not inside [{self.a}, {self.b}]")
        if self.a in self.u or self.b not in self.u:
            raise NotInFnError(f"U = {sorted(self.u)} must contain {self.b} and not {self.a}")

    @classmethod
    def of(cls, n: int, a: int, b: int, u: Iterable[int]) -> "JiTriple":
        return cls(n, a, b, frozenset(u))

    def __str__(self) -> str:
        return f"<{self.a},{self.b};{{{','.join(map(str, sorted(self.u)))}}}>"


def restrict(u: Iterable[int], i: int, j: int) -> frozenset[int]:
    """U restricted to the interval from i to j: (U ∩ ]i, j]) ∪ {j}.

    The left end is excluded so that (i, j, restrict(U, i, j)) always lies in F_n.
    """
    return frozenset(x for x in u if i < x <= j) | {j}


def triple_set(t: JiTriple) -> PairSet:
    """<a, b; U> = J_n ∩ (([a, b] \\ U) x U)."""
    lefts = [i for i in range(t.a, t.b + 1) if i not in t.u]
    return PairSet.from_pairs(t.n, ((i, j) for i in lefts for j in sorted(t.u) if i < j))


def enumerate_f(n: int) -> list[JiTriple]:
    """All of F_n, ordered by (a, b) and then by the sorted interior of U."""
    triples = []
    for a, b in pair_order(n):
        inner = list(range(a + 1, b))
        for size in range(len(inner) + 1):
            for subset in itertools.combinations(inner, size):
                triples.append(JiTriple(n, a, b, frozenset(subset) | {b}))
    return triples


def lower_cover_formula(t: JiTriple) -> PairSet:
    return triple_set(t) - PairSet.from_pairs(t.n, [(t.a, t.b)])


def kappa_formula(t: JiTriple) -> PairSet:
    """kappa(<a, b; U>) = <a, b; Ũ>ᶜ with Ũ = (]a, b[ \\ U) ∪ {b}."""
    u_tilde = frozenset(x for x in range(t.a + 1, t.b) if x not in t.u) | {t.b}
    return ~triple_set(JiTriple(t.n, t.a, t.b, u_tilde))


def d_formula(s: JiTriple, t: JiTriple) -> bool:
    """<a, b; U> D <c, d; V> iff [c, d] is a proper subinterval and V = U restricted to it."""
    if s.n != t.n:
        return False
    if not (s.a <= t.a and t.b <= s.b) or (s.a, s.b) == (t.a, t.b):
        return False
    return t.u == restrict(s.u, t.a, t.b)


def subdivisions(a: int, b: int) -> Iterator[tuple[int, ...]]:
    """All chains a = z_0 < z_1 < ... < z_k = b with k >= 2."""
    inner = list(range(a + 1, b))
    for size in range(1, len(inner) + 1):
        for middle in itertools.combinations(inner, size):
            yield (a, *middle, b)


def min_covers_formula(t: JiTriple) -> list[frozenset[JiTriple]]:
    """Minimal nontrivial join-covers of <a, b; U>, one per subdivision of [a, b]."""
    covers = []
    for chain_ in subdivisions(t.a, t.b):
        covers.append(
            frozenset(
                JiTriple(t.n, lo, hi, restrict(t.u, lo, hi))
                for lo, hi in zip(chain_, chain_[1:])
            )
        )
    return covers


def _one_line(sigma: Permutation) -> str:
    return "".join(map(str, sigma)) if len(sigma) < 10 else " ".join(map(str, sigma))


def build_permutohedron(
    n: int,
    max_n: int = 8,
    dense_limit: int = DEFAULT_DENSE_LIMIT,
    table_limit: int = DEFAULT_TABLE_LIMIT,
) -> FiniteLattice:
    """P(n) with inversion sets as payloads, ordered by (size, bits).

    Raises:
        SizeLimitError: If n is outside 1..max_n.
    """
    if not 1 <= n <= max_n:
        raise SizeLimitError(f"P({n}) is outside the permitted range 1..{max_n}")
    perms = list(itertools.permutations(range(1, n + 1)))
    sets = [inversions(sigma) for sigma in perms]
    order_ids = sorted(range(len(perms)), key=lambda k: (len(sets[k]), sets[k].bits))
    perms = [perms[k] for k in order_ids]
    sets = [sets[k] for k in order_ids]
    index = {sigma: k for k, sigma in enumerate(perms)}

    covers = []
    for k, sigma in enumerate(perms):
        for pos in range(n - 1):
            if sigma[pos] < sigma[pos + 1]:
                swapped = list(sigma)
                swapped[pos], swapped[pos + 1] = swapped[pos + 1], swapped[pos]
                covers.append((k, index[tuple(swapped)]))

    names = [_one_line(sigma) for sigma in perms]
    logger.debug(f"P({n}): {len(sets)} elements, {len(covers)} covers")
    if len(sets) <= dense_limit:
        bits = np.array([s.bits for s in sets], dtype=np.uint64)
        order = (bits[:, None] & ~bits[None, :]) == 0
        return FiniteLattice(
            order, names=names, elements=sets, covers=covers, validate=False, table_limit=table_limit
        )
    return FiniteLattice.from_payloads(
        sets, lambda x, y: x <= y, meet, join, covers, names=names
    )


def clopen_sets_by_filter(n: int) -> list[PairSet]:
    """All clopen subsets of J_n by scanning every subset (small n only)."""
    if n > 5:
        raise SizeLimitError("subset filtering is limited to n <= 5")
    total = len(pair_order(n))
    return [x for x in (PairSet(n, bits) for bits in range(1 << total)) if x.is_clopen()]


def closed_form_mismatches(n: int, check_covers: bool = True) -> list[str]:
    """Compare the F_n formulas with brute force on P(n); an empty list means full agreement.

    Covers the join-irreducibles themselves, lower covers, kappa, the
    D relation and, when check_covers is set, the minimal join-covers.
    """
    perm = build_permutohedron(n)
    ids = {t: perm.index_of(triple_set(t)) for t in enumerate_f(n)}
    problems = []
    if sorted(ids.values()) != sorted(perm.ji):
        problems.append(f"P({n}): triples do not index the join-irreducibles")
        return problems
    for t, p in ids.items():
        if perm.elements[perm.lower_cover(p)] != lower_cover_formula(t):
            problems.append(f"lower cover of {t}")
        k = kappa(perm, p)
        if k is None or perm.elements[k] != kappa_formula(t):
            problems.append(f"kappa of {t}")
    dependency = join_dependency(perm)
    for s, ps in ids.items():
        for t, pt in ids.items():
            if d_formula(s, t) != ((ps, pt) in dependency):
                problems.append(f"D between {s} and {t}")
    if check_covers:
        for t, p in ids.items():
            brute = set(minimal_join_covers(perm, p))
            formula = {frozenset(ids[q] for q in c) for c in min_covers_formula(t)}
            if brute != formula:
                problems.append(f"minimal join-covers of {t}")
    logger.debug(f"P({n}): {len(problems)} closed-form mismatches")
    return problems
