"""Finite lattices given by an explicit order relation.

A FiniteLattice stores its order as a dense numpy boolean matrix
(``order[x, y]`` is true iff x <= y). Elements are the ids 0..size-1;
optional payloads (pair sets, bracket functions, atom masks) and names
ride along. Lattices that are too large for a dense matrix are kept in
element mode: payloads compare themselves and the builder hands over the
cover relation.

Everything here is generic lattice theory: covers, irreducibles, arrow
relations, kappa, join-dependency, congruences, boundedness, products,
duals, interval doubling, sublattice closure, embeddings and isomorphism.
"""

import logging
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Optional, Sequence

import networkx as nx
import numpy as np
from networkx.algorithms.isomorphism import DiGraphMatcher

from config import DEFAULT_DENSE_LIMIT, DEFAULT_TABLE_LIMIT
from errors import (
    BadIntervalError,
    LatticeForgeError,
    NotACongruenceError,
    NotALatticeError,
    NotAPosetError,
    NotJoinIrreducibleError,
    SizeLimitError,
    TrivialLatticeError,
)

logger = logging.getLogger(__name__)

Element = int
Pair = tuple[int, int]


def _closure(relation: np.ndarray) -> np.ndarray:
    """Reflexive-transitive closure by repeated squaring."""
    m = relation.copy()
    np.fill_diagonal(m, True)
    while True:
        f = m.astype(np.float32)
        nxt = (f @ f) > 0
        if np.array_equal(nxt, m):
            return m
        m = nxt


def _first_true(mask: np.ndarray) -> Pair:
    idx = np.argwhere(mask)[0]
    return int(idx[0]), int(idx[1])


def _lub_row(order: np.ndarray, down: np.ndarray, x: int) -> tuple[np.ndarray, np.ndarray]:
    """Least upper bounds of x with every y, and a validity mask."""
    n = len(order)
    upper = order[x][None, :] & order
    cand = np.where(upper, down[None, :], n + 1).argmin(axis=1)
    ok = upper[np.arange(n), cand] & (~upper | order[cand, :]).all(axis=1)
    return cand, ok


def _glb_row(order: np.ndarray, up: np.ndarray, x: int) -> tuple[np.ndarray, np.ndarray]:
    n = len(order)
    lower = order[:, x][None, :] & order.T
    cand = np.where(lower, up[None, :], n + 1).argmin(axis=1)
    ok = lower[np.arange(n), cand] & (~lower | order[:, cand].T).all(axis=1)
    return cand, ok


class FiniteLattice:
    """An immutable finite lattice.

    Args:
        order: Square boolean matrix of the order relation (reflexive,
            antisymmetric, transitive). Ignored in element mode.
        names: Optional per-element labels.
        elements: Optional per-element payloads.
        covers: Optional list of (lower, upper) cover pairs; computed from
            the order matrix when omitted.
        validate: Check the poset axioms and the existence of all meets
            and joins. Builders whose output is a lattice by construction
            pass False.
        table_limit: Meet/join tables are cached up to this many elements.

    Raises:
        NotAPosetError: If the relation is not a partial order.
        NotALatticeError: If some pair has no meet or no join.
    """

    def __init__(
        self,
        order: Optional[np.ndarray],
        names: Optional[Sequence[str]] = None,
        elements: Optional[Sequence[Any]] = None,
        covers: Optional[Iterable[Pair]] = None,
        validate: bool = True,
        table_limit: int = DEFAULT_TABLE_LIMIT,
        _payload_ops: Optional[tuple[Callable, Callable, Callable]] = None,
        _size: Optional[int] = None,
    ) -> None:
        self._payload_ops = _payload_ops
        if order is None:
            if _payload_ops is None or elements is None or covers is None:
                raise LatticeForgeError(
                    "element-mode lattices need payloads, payload operations and covers"
                )
            self.size = len(elements) if _size is None else _size
            self._order = None
        else:
            order = np.array(order, dtype=bool)
            if order.ndim != 2 or order.shape[0] != order.shape[1]:
                raise NotAPosetError("order matrix must be square")
            self.size = order.shape[0]
            if validate:
                self._check_poset(order)
            order.setflags(write=False)
            self._order = order
        if self.size == 0:
            raise NotALatticeError("a lattice needs at least one element")

        self.names: tuple[str, ...] = (
            tuple(str(n) for n in names) if names is not None
            else tuple(str(i) for i in range(self.size))
        )
        self.elements: Optional[tuple[Any, ...]] = (
            tuple(elements) if elements is not None else None
        )
        self._index: Optional[dict[Any, int]] = (
            {e: i for i, e in enumerate(self.elements)} if self.elements is not None else None
        )
        self.table_limit = table_limit
        self._cache: dict[Any, Any] = {}

        if self._order is not None:
            self._down = self._order.sum(axis=0)
            self._up = self._order.sum(axis=1)
            self._tables: Optional[tuple[np.ndarray, np.ndarray]] = None
            if validate or self.size <= table_limit:
                tables = self._build_tables()
                if self.size <= table_limit:
                    self._tables = tables

        if covers is not None:
            cover_list = sorted(set((int(a), int(b)) for a, b in covers))
        else:
            cover_list = self._covers_from_order()
        lower: list[list[int]] = [[] for _ in range(self.size)]
        upper: list[list[int]] = [[] for _ in range(self.size)]
        for a, b in cover_list:
            lower[b].append(a)
            upper[a].append(b)
        self.covers: tuple[Pair, ...] = tuple(cover_list)
        self.lower_covers: tuple[tuple[int, ...], ...] = tuple(tuple(c) for c in lower)
        self.upper_covers: tuple[tuple[int, ...], ...] = tuple(tuple(c) for c in upper)
        self.ji: tuple[int, ...] = tuple(x for x in range(self.size) if len(lower[x]) == 1)
        self.mi: tuple[int, ...] = tuple(x for x in range(self.size) if len(upper[x]) == 1)
        minimal = [x for x in range(self.size) if not lower[x]]
        maximal = [x for x in range(self.size) if not upper[x]]
        if len(minimal) != 1 or len(maximal) != 1:
            raise NotALatticeError("a lattice has exactly one minimal and one maximal element")
        self.bottom: int = minimal[0]
        self.top: int = maximal[0]

    # -- construction ------------------------------------------------------

    @classmethod
    def from_order(
        cls,
        size: int,
        pairs: Iterable[Pair],
        names: Optional[Sequence[str]] = None,
        elements: Optional[Sequence[Any]] = None,
        table_limit: int = DEFAULT_TABLE_LIMIT,
    ) -> "FiniteLattice":
        """Build a lattice from generating order pairs (x, y) meaning x <= y."""
        relation = np.zeros((size, size), dtype=bool)
        for x, y in pairs:
            if not (0 <= x < size and 0 <= y < size):
                raise NotAPosetError(f"pair ({x}, {y}) out of range for {size} elements")
            relation[x, y] = True
        return cls(_closure(relation), names=names, elements=elements, table_limit=table_limit)

    @classmethod
    def from_payloads(
        cls,
        elements: Sequence[Any],
        leq: Callable[[Any, Any], bool],
        meet: Callable[[Any, Any], Any],
        join: Callable[[Any, Any], Any],
        covers: Iterable[Pair],
        names: Optional[Sequence[str]] = None,
    ) -> "FiniteLattice":
        """Element-mode lattice: no global order matrix is materialized."""
        return cls(
            None,
            names=names,
            elements=elements,
            covers=covers,
            validate=False,
            _payload_ops=(leq, meet, join),
        )

    @staticmethod
    def _check_poset(order: np.ndarray) -> None:
        n = len(order)
        if not order.diagonal().all():
            x = int(np.flatnonzero(~order.diagonal())[0])
            raise NotAPosetError(f"relation is not reflexive at {x}", pair=(x, x))
        both = order & order.T & ~np.eye(n, dtype=bool)
        if both.any():
            x, y = _first_true(both)
            raise NotAPosetError(f"elements {x} and {y} are mutually below each other", pair=(x, y))
        f = order.astype(np.float32)
        missing = ((f @ f) > 0) & ~order
        if missing.any():
            x, y = _first_true(missing)
            raise NotAPosetError(f"relation is not transitive: {x} <= {y} is implied", pair=(x, y))

    def _build_tables(self) -> tuple[np.ndarray, np.ndarray]:
        n = self.size
        order = self._order
        meet = np.empty((n, n), dtype=np.int32)
        join = np.empty((n, n), dtype=np.int32)
        for x in range(n):
            cand, ok = _lub_row(order, self._down, x)
            if not ok.all():
                y = int(np.flatnonzero(~ok)[0])
                raise NotALatticeError(
                    f"{self.names_or_ids(x, y)} have no least upper bound", pair=(x, y)
                )
            join[x] = cand
            cand, ok = _glb_row(order, self._up, x)
            if not ok.all():
                y = int(np.flatnonzero(~ok)[0])
                raise NotALatticeError(
                    f"{self.names_or_ids(x, y)} have no greatest lower bound", pair=(x, y)
                )
            meet[x] = cand
        meet.setflags(write=False)
        join.setflags(write=False)
        return meet, join

    def names_or_ids(self, x: int, y: int) -> str:
        names = getattr(self, "names", None)
        if names:
            return f"'{names[x]}' and '{names[y]}'"
        return f"{x} and {y}"

    def _covers_from_order(self) -> list[Pair]:
        if self._order is None:
            raise SizeLimitError("covers must be supplied for element-mode lattices")
        lt = self._order & ~np.eye(self.size, dtype=bool)
        f = lt.astype(np.float32)
        cover = lt & ~((f @ f) > 0)
        return [(int(a), int(b)) for a, b in np.argwhere(cover)]

    # -- order and operations ----------------------------------------------

    @property
    def is_dense(self) -> bool:
        return self._order is not None

    @property
    def order(self) -> np.ndarray:
        """The dense order matrix.

        Raises:
            SizeLimitError: For element-mode lattices.
        """
        if self._order is None:
            raise SizeLimitError(
                f"lattice with {self.size} elements has no dense order matrix"
            )
        return self._order

    def __len__(self) -> int:
        return self.size

    def __repr__(self) -> str:
        return f"FiniteLattice(size={self.size}, ji={len(self.ji)}, mi={len(self.mi)})"

    def index_of(self, payload: Any) -> int:
        if self._index is None:
            raise KeyError("lattice carries no element payloads")
        return self._index[payload]

    def has_payload(self, payload: Any) -> bool:
        return self._index is not None and payload in self._index

    def leq(self, x: int, y: int) -> bool:
        if self._order is not None:
            return bool(self._order[x, y])
        return bool(self._payload_ops[0](self.elements[x], self.elements[y]))

    def lt(self, x: int, y: int) -> bool:
        return x != y and self.leq(x, y)

    def meet(self, x: int, y: int) -> int:
        if self._order is None:
            return self._index[self._payload_ops[1](self.elements[x], self.elements[y])]
        if self._tables is not None:
            return int(self._tables[0][x, y])
        lower = np.flatnonzero(self._order[:, x] & self._order[:, y])
        return int(lower[np.argmax(self._down[lower])])

    def join(self, x: int, y: int) -> int:
        if self._order is None:
            return self._index[self._payload_ops[2](self.elements[x], self.elements[y])]
        if self._tables is not None:
            return int(self._tables[1][x, y])
        upper = np.flatnonzero(self._order[x] & self._order[y])
        return int(upper[np.argmin(self._down[upper])])

    def meet_all(self, xs: Iterable[int]) -> int:
        result = self.top
        for x in xs:
            result = self.meet(result, x)
        return result

    def join_all(self, xs: Iterable[int]) -> int:
        result = self.bottom
        for x in xs:
            result = self.join(result, x)
        return result

    def operation_tables(self) -> tuple[np.ndarray, np.ndarray]:
        """Return (meet, join) tables, computing them when not cached."""
        if self._order is None:
            raise SizeLimitError(
                f"operation tables unavailable for a {self.size}-element element-mode lattice"
            )
        if self._tables is not None:
            return self._tables
        return self._build_tables()

    def lower_cover(self, p: int) -> int:
        """The unique lower cover p_* of a join-irreducible p."""
        covers = self.lower_covers[p]
        if len(covers) != 1:
            raise NotJoinIrreducibleError(f"element '{self.names[p]}' is not join-irreducible")
        return covers[0]

    def upper_cover(self, u: int) -> int:
        """The unique upper cover u^* of a meet-irreducible u."""
        covers = self.upper_covers[u]
        if len(covers) != 1:
            raise LatticeForgeError(f"element '{self.names[u]}' is not meet-irreducible")
        return covers[0]

    def heights(self) -> tuple[int, ...]:
        """Length of the longest chain from the bottom to each element."""
        if "heights" not in self._cache:
            height = [0] * self.size
            for x in self.linear_extension():
                for y in self.upper_covers[x]:
                    height[y] = max(height[y], height[x] + 1)
            self._cache["heights"] = tuple(height)
        return self._cache["heights"]

    def linear_extension(self) -> list[int]:
        if self._order is not None:
            return [int(x) for x in np.argsort(self._down, kind="stable")]
        indegree = [len(c) for c in self.lower_covers]
        ready = [x for x in range(self.size) if indegree[x] == 0]
        result = []
        while ready:
            x = ready.pop()
            result.append(x)
            for y in self.upper_covers[x]:
                indegree[y] -= 1
                if indegree[y] == 0:
                    ready.append(y)
        return result

    def cover_graph(self) -> nx.DiGraph:
        graph = nx.DiGraph()
        graph.add_nodes_from(range(self.size))
        graph.add_edges_from(self.covers)
        return graph


@dataclass(frozen=True)
class LatticeMap:
    """A total map between the elements of two lattices."""

    source: FiniteLattice
    target: FiniteLattice
    images: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.images) != self.source.size:
            raise LatticeForgeError(
                f"map has {len(self.images)} images for {self.source.size} elements"
            )
        for y in self.images:
            if not 0 <= y < self.target.size:
                raise LatticeForgeError(f"image {y} is not an element of the target")

    def __call__(self, x: int) -> int:
        return self.images[x]

    def then(self, other: "LatticeMap") -> "LatticeMap":
        """Composition: apply self, then other."""
        return LatticeMap(self.source, other.target, tuple(other.images[y] for y in self.images))

    def is_injective(self) -> bool:
        return len(set(self.images)) == len(self.images)

    def is_surjective(self) -> bool:
        return len(set(self.images)) == self.target.size


@dataclass(frozen=True)
class Congruence:
    """A partition of the elements of a lattice, stored as block labels.

    Blocks are numbered in order of their smallest element id.
    """

    lattice: FiniteLattice
    labels: tuple[int, ...]

    @classmethod
    def from_representatives(cls, lattice: FiniteLattice, roots: Sequence[int]) -> "Congruence":
        numbering: dict[int, int] = {}
        labels = []
        for root in roots:
            if root not in numbering:
                numbering[root] = len(numbering)
            labels.append(numbering[root])
        return cls(lattice, tuple(labels))

    @classmethod
    def identity(cls, lattice: FiniteLattice) -> "Congruence":
        return cls(lattice, tuple(range(lattice.size)))

    @classmethod
    def total(cls, lattice: FiniteLattice) -> "Congruence":
        return cls(lattice, (0,) * lattice.size)

    @property
    def blocks(self) -> tuple[tuple[int, ...], ...]:
        groups: dict[int, list[int]] = {}
        for x, label in enumerate(self.labels):
            groups.setdefault(label, []).append(x)
        return tuple(tuple(groups[k]) for k in sorted(groups))

    def same(self, x: int, y: int) -> bool:
        return self.labels[x] == self.labels[y]

    def is_identity(self) -> bool:
        return len(set(self.labels)) == len(self.labels)

    def is_total(self) -> bool:
        return len(set(self.labels)) == 1

    def __le__(self, other: "Congruence") -> bool:
        """Refinement: every block of self lies inside a block of other."""
        mapping: dict[int, int] = {}
        for mine, theirs in zip(self.labels, other.labels):
            if mapping.setdefault(mine, theirs) != theirs:
                return False
        return True

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Congruence):
            return NotImplemented
        return self.lattice is other.lattice and self.labels == other.labels

    def __hash__(self) -> int:
        return hash(self.labels)


class _UnionFind:
    def __init__(self, size: int) -> None:
        self.parent = list(range(size))

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x: int, y: int) -> bool:
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return False
        if ry < rx:
            rx, ry = ry, rx
        self.parent[ry] = rx
        return True

    def roots(self) -> list[int]:
        return [self.find(x) for x in range(len(self.parent))]


# -- catalogue -------------------------------------------------------------


def chain(k: int) -> FiniteLattice:
    """The k-element chain 0 < 1 < ... < k-1."""
    if k < 1:
        raise LatticeForgeError("a chain needs at least one element")
    order = np.triu(np.ones((k, k), dtype=bool))
    return FiniteLattice(order)


def boolean_lattice(k: int) -> FiniteLattice:
    """The lattice of subsets of k atoms; element ids are the subset masks."""
    masks = np.arange(1 << k)
    order = (masks[:, None] & ~masks[None, :]) == 0
    names = ["0" if m == 0 else "+".join(f"e{i + 1}" for i in range(k) if m >> i & 1) for m in range(1 << k)]
    covers = [(m, m | 1 << i) for m in range(1 << k) for i in range(k) if not m >> i & 1]
    return FiniteLattice(order, names=names, elements=list(range(1 << k)), covers=covers, validate=False)


def n5() -> FiniteLattice:
    """The pentagon: 0 < a < b < 1 and 0 < c < 1."""
    return FiniteLattice.from_order(
        5, [(0, 1), (1, 2), (2, 4), (0, 3), (3, 4)], names=["0", "a", "b", "c", "1"]
    )


def m3() -> FiniteLattice:
    """The diamond: 0 < x, y, z < 1."""
    return FiniteLattice.from_order(
        5, [(0, 1), (0, 2), (0, 3), (1, 4), (2, 4), (3, 4)], names=["0", "x", "y", "z", "1"]
    )


# -- arrows, kappa, join-dependency -----------------------------------------


@dataclass(frozen=True)
class Arrows:
    """Arrow relations: (x, u) in up means x ↗ u; (u, p) in down means u ↘ p."""

    up: frozenset[Pair]
    down: frozenset[Pair]


def arrows(lattice: FiniteLattice) -> Arrows:
    order = lattice.order
    up: set[Pair] = set()
    for u in lattice.mi:
        u_star = lattice.upper_cover(u)
        for x in np.flatnonzero(~order[:, u] & order[:, u_star]):
            up.add((int(x), u))
    down: set[Pair] = set()
    for p in lattice.ji:
        p_star = lattice.lower_cover(p)
        for u in np.flatnonzero(~order[p] & order[p_star]):
            down.add((int(u), p))
    return Arrows(frozenset(up), frozenset(down))


def kappa(lattice: FiniteLattice, p: int) -> Optional[int]:
    """The largest u with u ↘ p, or None when the set has no maximum.

    Raises:
        NotJoinIrreducibleError: If p is not join-irreducible.
    """
    p_star = lattice.lower_cover(p)
    order = lattice.order
    candidates = np.flatnonzero(~order[p] & order[p_star])
    for u in candidates:
        if order[candidates, u].all():
            return int(u)
    return None


def join_dependency(lattice: FiniteLattice) -> frozenset[Pair]:
    """The relation a D q on L x Ji(L).

    a D q iff a != q and a <= q ∨ x but not a <= q_* ∨ x for some x.
    """
    if "join_dependency" in lattice._cache:
        return lattice._cache["join_dependency"]
    order = lattice.order
    _, join = lattice.operation_tables()
    relation: set[Pair] = set()
    for q in lattice.ji:
        q_star = lattice.lower_cover(q)
        witnessed = (order[:, join[q]] & ~order[:, join[q_star]]).any(axis=1)
        witnessed[q] = False
        relation.update((int(a), q) for a in np.flatnonzero(witnessed))
    result = frozenset(relation)
    lattice._cache["join_dependency"] = result
    return result


def join_dependency_by_arrows(lattice: FiniteLattice) -> frozenset[Pair]:
    """D on Ji x Ji through p ↗ u ↘ q for some meet-irreducible u."""
    rel = arrows(lattice)
    ups: dict[int, set[int]] = {}
    for x, u in rel.up:
        ups.setdefault(x, set()).add(u)
    downs: dict[int, set[int]] = {}
    for u, q in rel.down:
        downs.setdefault(u, set()).add(q)
    relation = set()
    for p in lattice.ji:
        for u in ups.get(p, ()):
            for q in downs.get(u, ()):
                if q != p:
                    relation.add((p, q))
    return frozenset(relation)


def minimal_join_covers(
    lattice: FiniteLattice, a: int, max_candidates: int = 40
) -> list[frozenset[int]]:
    """All minimal nontrivial join-covers of a, sorted by their sorted ids."""
    candidates = [q for q in lattice.ji if not lattice.leq(a, q)]
    if len(candidates) > max_candidates:
        raise SizeLimitError(
            f"{len(candidates)} join-irreducibles are too many for a cover enumeration"
        )
    covers: list[frozenset[int]] = []

    def extend(start: int, chosen: list[int], current: int) -> None:
        for idx in range(start, len(candidates)):
            q = candidates[idx]
            if any(lattice.leq(q, c) or lattice.leq(c, q) for c in chosen):
                continue
            joined = lattice.join(current, q)
            if lattice.leq(a, joined):
                covers.append(frozenset(chosen + [q]))
            else:
                extend(idx + 1, chosen + [q], joined)

    extend(0, [], lattice.bottom)

    def refines(d: frozenset[int], c: frozenset[int]) -> bool:
        return all(any(lattice.leq(x, y) for y in c) for x in d)

    minimal = [c for c in covers if not any(d != c and refines(d, c) for d in covers)]
    return sorted(set(minimal), key=lambda c: sorted(c))


def _dependency_graph(lattice: FiniteLattice) -> nx.DiGraph:
    ji = set(lattice.ji)
    graph = nx.DiGraph()
    graph.add_nodes_from(ji)
    graph.add_edges_from((a, q) for a, q in join_dependency(lattice) if a in ji)
    return graph


def is_bounded(lattice: FiniteLattice) -> bool:
    """D is cycle-free on Ji(L) and on Ji of the dual."""
    for side in (lattice, dual(lattice)):
        if not nx.is_directed_acyclic_graph(_dependency_graph(side)):
            return False
    return True


def is_join_semidistributive(lattice: FiniteLattice) -> bool:
    """x ∨ y = x ∨ z implies x ∨ y = x ∨ (y ∧ z), for all triples."""
    meet, join = lattice.operation_tables()
    for x in range(lattice.size):
        row = join[x]
        equal = row[:, None] == row[None, :]
        if (equal & (row[meet] != row[:, None])).any():
            return False
    return True


def is_meet_semidistributive(lattice: FiniteLattice) -> bool:
    meet, join = lattice.operation_tables()
    for x in range(lattice.size):
        row = meet[x]
        equal = row[:, None] == row[None, :]
        if (equal & (row[join] != row[:, None])).any():
            return False
    return True


def is_semidistributive(lattice: FiniteLattice) -> bool:
    return is_join_semidistributive(lattice) and is_meet_semidistributive(lattice)


def is_distributive(lattice: FiniteLattice) -> bool:
    meet, join = lattice.operation_tables()
    for x in range(lattice.size):
        lhs = meet[x][join]
        rhs = join[meet[x][:, None], meet[x][None, :]]
        if (lhs != rhs).any():
            return False
    return True


# -- congruences -------------------------------------------------------------


def congruence_generated(lattice: FiniteLattice, pairs: Iterable[Pair]) -> Congruence:
    """The least congruence collapsing every given pair."""
    meet, join = lattice.operation_tables()
    uf = _UnionFind(lattice.size)
    pending = [(x, y) for x, y in pairs if uf.union(x, y)]
    while pending:
        x, y = pending.pop()
        for table in (meet, join):
            for u, v in zip(table[x], table[y]):
                if uf.union(int(u), int(v)):
                    pending.append((int(u), int(v)))
    return Congruence.from_representatives(lattice, uf.roots())


def congruence_join(lattice: FiniteLattice, congruences: Iterable[Congruence]) -> Congruence:
    uf = _UnionFind(lattice.size)
    for theta in congruences:
        for block in theta.blocks:
            for x in block[1:]:
                uf.union(block[0], x)
    return Congruence.from_representatives(lattice, uf.roots())


def theta(lattice: FiniteLattice, p: int) -> Congruence:
    """The least congruence identifying p with its lower cover."""
    key = ("theta", p)
    if key not in lattice._cache:
        lattice._cache[key] = congruence_generated(lattice, [(p, lattice.lower_cover(p))])
    return lattice._cache[key]


def psi(lattice: FiniteLattice, p: int) -> Congruence:
    """The largest congruence that keeps p and its lower cover apart."""
    p_star = lattice.lower_cover(p)
    keep = [theta(lattice, q) for q in lattice.ji if not theta(lattice, q).same(p, p_star)]
    result = congruence_join(lattice, keep)
    if result.same(p, p_star):
        raise LatticeForgeError(
            f"join of congruences avoiding '{lattice.names[p]}' collapses it; lattice is inconsistent"
        )
    return result


def meet_irreducible_congruences(lattice: FiniteLattice) -> list[Congruence]:
    """The distinct congruences psi(p), in order of first join-irreducible."""
    seen: list[Congruence] = []
    for p in lattice.ji:
        candidate = psi(lattice, p)
        if candidate not in seen:
            seen.append(candidate)
    return seen


def minimal_meet_irreducible_congruences(lattice: FiniteLattice) -> list[Congruence]:
    found = meet_irreducible_congruences(lattice)
    return [c for c in found if not any(d != c and d <= c for d in found)]


def monolith(lattice: FiniteLattice) -> Optional[Congruence]:
    """The least nonzero congruence, or None if there is none."""
    if lattice.size == 1:
        raise TrivialLatticeError("the one-element lattice has no nonzero congruence")
    for p in lattice.ji:
        p_star = lattice.lower_cover(p)
        if all(theta(lattice, q).same(p, p_star) for q in lattice.ji):
            return theta(lattice, p)
    return None


def is_subdirectly_irreducible(lattice: FiniteLattice) -> bool:
    return monolith(lattice) is not None


def is_congruence(lattice: FiniteLattice, labels: Sequence[int]) -> bool:
    lab = np.asarray(labels)
    meet, join = lattice.operation_tables()
    first = {}
    for x, label in enumerate(labels):
        first.setdefault(label, x)
    rep = np.array([first[label] for label in labels])
    for table in (meet, join):
        images = lab[table]
        if (images != images[rep, :]).any():
            return False
    return True


def quotient(lattice: FiniteLattice, congruence: Congruence) -> tuple[FiniteLattice, LatticeMap]:
    """The lattice of blocks and the projection onto it.

    Raises:
        NotACongruenceError: If the partition is not compatible.
    """
    if not is_congruence(lattice, congruence.labels):
        raise NotACongruenceError("partition is not compatible with meet and join")
    bottoms = [lattice.meet_all(block) for block in congruence.blocks]
    order = lattice.order[np.ix_(bottoms, bottoms)]
    names = [lattice.names[b] for b in bottoms]
    result = FiniteLattice(order, names=names)
    return result, LatticeMap(lattice, result, congruence.labels)


# -- constructions -----------------------------------------------------------


def dual(lattice: FiniteLattice) -> FiniteLattice:
    """Same elements, order reversed."""
    covers = [(b, a) for a, b in lattice.covers]
    if lattice.is_dense:
        return FiniteLattice(
            lattice.order.T, names=lattice.names, elements=lattice.elements,
            covers=covers, validate=False, table_limit=lattice.table_limit,
        )
    leq, meet, join = lattice._payload_ops
    return FiniteLattice.from_payloads(
        lattice.elements, lambda x, y: leq(y, x), join, meet, covers, names=lattice.names
    )


def product(first: FiniteLattice, second: FiniteLattice) -> FiniteLattice:
    """Componentwise order; element (i, j) has id i * |second| + j."""
    order = np.kron(first.order.astype(np.uint8), second.order.astype(np.uint8)).astype(bool)
    names = [f"({a},{b})" for a in first.names for b in second.names]
    elements = None
    if first.elements is not None and second.elements is not None:
        elements = [(a, b) for a in first.elements for b in second.elements]
    k = second.size
    covers = [(a * k + j, b * k + j) for a, b in first.covers for j in range(k)]
    covers += [(i * k + a, i * k + b) for i in range(first.size) for a, b in second.covers]
    return FiniteLattice(order, names=names, elements=elements, covers=covers, validate=False)


def double_interval(lattice: FiniteLattice, a: int, b: int) -> FiniteLattice:
    """Replace [a, b] by [a, b] x 2 inside L x 2.

    Elements below-or-beside the interval keep bit 0, elements above a but
    outside the interval take bit 1, interval elements appear with both.

    Raises:
        BadIntervalError: If a is not below b.
    """
    if not lattice.leq(a, b):
        raise BadIntervalError(f"'{lattice.names[a]}' is not below '{lattice.names[b]}'")
    order = lattice.order
    above_a = order[a]
    inside = above_a & order[:, b]
    points: list[tuple[int, int]] = []
    for x in range(lattice.size):
        if not above_a[x] or inside[x]:
            points.append((x, 0))
        if above_a[x]:
            points.append((x, 1))
    xs = np.array([x for x, _ in points])
    bits = np.array([bit for _, bit in points])
    new_order = order[np.ix_(xs, xs)] & (bits[:, None] <= bits[None, :])
    names = [lattice.names[x] + ("'" if bit and inside[x] else "") for x, bit in points]
    return FiniteLattice(new_order, names=names, elements=points)


def sublattice_closure(lattice: FiniteLattice, subset: Iterable[int]) -> frozenset[int]:
    """The least subset containing the given elements closed under meet and join."""
    closed: set[int] = set()
    frontier = list(dict.fromkeys(subset))
    while frontier:
        fresh: set[int] = set()
        current = list(closed)
        for x in frontier:
            closed.add(x)
            current.append(x)
        for x in frontier:
            for y in current:
                for z in (lattice.meet(x, y), lattice.join(x, y)):
                    if z not in closed:
                        fresh.add(z)
        frontier = sorted(fresh)
    return frozenset(closed)


def induced_sublattice(lattice: FiniteLattice, subset: Iterable[int]) -> tuple[FiniteLattice, LatticeMap]:
    """The sublattice on a meet/join-closed subset, with its inclusion map."""
    members = sorted(set(subset))
    closure = sublattice_closure(lattice, members)
    if len(closure) != len(members):
        raise LatticeForgeError("subset is not closed under meet and join")
    order = lattice.order[np.ix_(members, members)]
    elements = [lattice.elements[x] for x in members] if lattice.elements is not None else None
    sub = FiniteLattice(order, names=[lattice.names[x] for x in members], elements=elements, validate=False)
    return sub, LatticeMap(sub, lattice, tuple(members))


def verify_embedding(mapping: LatticeMap) -> bool:
    """Injective and preserving both operations."""
    if not mapping.is_injective():
        return False
    images = np.asarray(mapping.images)
    source, target = mapping.source, mapping.target
    if source.is_dense and target.is_dense:
        s_meet, s_join = source.operation_tables()
        t_meet, t_join = target.operation_tables()
        sub = np.ix_(images, images)
        return bool(
            (images[s_meet] == t_meet[sub]).all() and (images[s_join] == t_join[sub]).all()
        )
    for x in range(source.size):
        for y in range(x + 1, source.size):
            fx, fy = mapping(x), mapping(y)
            if mapping(source.meet(x, y)) != target.meet(fx, fy):
                return False
            if mapping(source.join(x, y)) != target.join(fx, fy):
                return False
    return True


def find_isomorphism(first: FiniteLattice, second: FiniteLattice) -> Optional[LatticeMap]:
    """An order isomorphism between two lattices, or None.

    Isomorphisms of cover digraphs are exactly order isomorphisms.
    """
    if first.size != second.size or len(first.covers) != len(second.covers):
        return None
    if sorted(first.heights()) != sorted(second.heights()):
        return None
    g1, g2 = first.cover_graph(), second.cover_graph()
    for graph, lat in ((g1, first), (g2, second)):
        heights = lat.heights()
        nx.set_node_attributes(graph, {x: heights[x] for x in range(lat.size)}, "height")
    matcher = DiGraphMatcher(g1, g2, node_match=lambda u, v: u["height"] == v["height"])
    if not matcher.is_isomorphic():
        return None
    mapping = matcher.mapping
    return LatticeMap(first, second, tuple(mapping[x] for x in range(first.size)))


def is_isomorphic(first: FiniteLattice, second: FiniteLattice) -> bool:
    return find_isomorphism(first, second) is not None
