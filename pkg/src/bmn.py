"""B(m, n): the Boolean lattice on m + n atoms with the join of the first m doubled.

Element ids 0 .. 2^(m+n) - 1 are the atom masks (a_i is bit i - 1, b_j is
bit m + j - 1); the doubled copy p of a = a_1 ∨ ... ∨ a_m gets the last id.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from config import DEFAULT_DENSE_LIMIT, DEFAULT_TABLE_LIMIT
from errors import LatticeForgeError, SizeLimitError
from lattice import (
    FiniteLattice,
    LatticeMap,
    boolean_lattice,
    double_interval,
    dual,
    is_bounded,
    is_semidistributive,
    is_subdirectly_irreducible,
    minimal_join_covers,
    verify_embedding,
)

logger = logging.getLogger(__name__)

P = -1


@dataclass(frozen=True)
class BmnLattice:
    lattice: FiniteLattice
    m: int
    n: int
    a_atoms: tuple[int, ...]
    b_atoms: tuple[int, ...]
    p: int
    a: int

    def element(self, a: tuple[int, ...] = (), b: tuple[int, ...] = ()) -> int:
        """Id of the Boolean element a_i (i in a) joined with b_j (j in b)."""
        mask = 0
        for i in a:
            mask |= 1 << (i - 1)
        for j in b:
            mask |= 1 << (self.m + j - 1)
        return mask


def _name(mask: int, m: int, n: int) -> str:
    if mask == P:
        return "p"
    parts = [f"a{i + 1}" for i in range(m) if mask >> i & 1]
    parts += [f"b{j + 1}" for j in range(n) if mask >> (m + j) & 1]
    return "+".join(parts) if parts else "0"


def _payload_ops(a_mask: int):
    def leq(x: int, y: int) -> bool:
        if x == P and y == P:
            return True
        if x == P:
            return y & a_mask == a_mask and y != a_mask
        if y == P:
            return x & ~a_mask == 0
        return x & ~y == 0

    def meet(x: int, y: int) -> int:
        if x == P and y == P:
            return P
        if x == P or y == P:
            z = y if x == P else x
            return P if leq(P, z) else z & a_mask
        both = x & y
        if both == a_mask and leq(P, x) and leq(P, y):
            return P
        return both

    def join(x: int, y: int) -> int:
        if x == P and y == P:
            return P
        if x == P or y == P:
            z = y if x == P else x
            return P if z & ~a_mask == 0 else z | a_mask
        return x | y

    return leq, meet, join


def build_bmn(
    m: int,
    n: int,
    max_atoms: int = 12,
    dense_limit: int = DEFAULT_DENSE_LIMIT,
    table_limit: int = DEFAULT_TABLE_LIMIT,
) -> BmnLattice:
    """B(m, n) with a_i < p < a ∨ b_j.

    Raises:
        SizeLimitError: If m + n exceeds max_atoms.
    """
    if m < 0 or n < 0 or m + n > max_atoms:
        raise SizeLimitError(f"B({m},{n}) needs 0 <= m, n and m + n <= {max_atoms}")
    k = m + n
    a_mask = (1 << m) - 1
    count = 1 << k
    p_id = count
    payloads = list(range(count)) + [P]
    names = [_name(x, m, n) for x in payloads]

    covers = []
    for z in range(count):
        for i in range(k):
            if z >> i & 1:
                continue
            if z == a_mask:
                continue
            covers.append((z, z | 1 << i))
    covers.append((a_mask, p_id))
    covers += [(p_id, a_mask | 1 << (m + j)) for j in range(n)]

    if count + 1 <= dense_limit:
        masks = np.arange(count)
        order = np.zeros((count + 1, count + 1), dtype=bool)
        order[:count, :count] = (masks[:, None] & ~masks[None, :]) == 0
        order[p_id, :count] = ((masks & a_mask) == a_mask) & (masks != a_mask)
        order[:count, p_id] = (masks & ~a_mask) == 0
        order[p_id, p_id] = True
        lattice = FiniteLattice(
            order, names=names, elements=payloads, covers=covers, validate=False,
            table_limit=table_limit,
        )
    else:
        leq, meet, join = _payload_ops(a_mask)
        lattice = FiniteLattice.from_payloads(payloads, leq, meet, join, covers, names=names)

    logger.debug(f"B({m},{n}): {lattice.size} elements")
    return BmnLattice(
        lattice=lattice,
        m=m,
        n=n,
        a_atoms=tuple(1 << i for i in range(m)),
        b_atoms=tuple(1 << (m + j) for j in range(n)),
        p=p_id,
        a=a_mask,
    )


def doubled_boolean(m: int, n: int) -> FiniteLattice:
    """B(m, n) obtained generically by doubling a in the Boolean lattice."""
    boolean = boolean_lattice(m + n)
    a = (1 << m) - 1
    return double_interval(boolean, a, a)


def bmn_dual_iso(m: int, n: int) -> LatticeMap:
    """B(m, n) -> dual(B(n, m)): a -> q, p -> the b-atoms joined, z -> complement of z.

    Raises:
        LatticeForgeError: If the map fails verification.
    """
    source = build_bmn(m, n)
    other = build_bmn(n, m)
    target = dual(other.lattice)
    full = (1 << (m + n)) - 1
    images = []
    for z in range(source.lattice.size):
        if z == source.a:
            images.append(other.p)
        elif z == source.p:
            images.append(other.a)
        else:
            rest = full ^ z
            b_part = (rest >> m) & ((1 << n) - 1)
            a_part = rest & ((1 << m) - 1)
            images.append(b_part | a_part << n)
    mapping = LatticeMap(source.lattice, target, tuple(images))
    if not (verify_embedding(mapping) and mapping.is_surjective()):
        raise LatticeForgeError(f"B({m},{n}) -> dual(B({n},{m})) is not an isomorphism")
    return mapping


def b22_into_bmn(m: int, n: int) -> LatticeMap:
    """B(2, 2) -> B(m, n) sending a_2 and b_2 to the joins of the remaining atoms."""
    if m < 2 or n < 2:
        raise LatticeForgeError(f"B(2,2) embeds this way only for m, n >= 2, got {m}, {n}")
    small = build_bmn(2, 2)
    big = build_bmn(m, n)
    atom_images = [
        1,
        ((1 << m) - 1) & ~1,
        1 << m,
        (((1 << n) - 1) << m) & ~(1 << m),
    ]
    images = []
    for z in range(small.lattice.size):
        if z == small.p:
            images.append(big.p)
            continue
        mask = 0
        for bit, image in enumerate(atom_images):
            if z >> bit & 1:
                mask |= image
        images.append(mask)
    return LatticeMap(small.lattice, big.lattice, tuple(images))


@dataclass
class BmnReport:
    m: int
    n: int
    size: int
    ji_count: int
    cover_count: int
    bounded: bool
    semidistributive: bool
    subdirectly_irreducible: bool
    p_covers: list[list[str]] = field(default_factory=list)


def bmn_structure_report(m: int, n: int) -> BmnReport:
    bmn = build_bmn(m, n)
    lat = bmn.lattice
    covers = minimal_join_covers(lat, bmn.p)
    return BmnReport(
        m=m,
        n=n,
        size=lat.size,
        ji_count=len(lat.ji),
        cover_count=len(lat.covers),
        bounded=is_bounded(lat),
        semidistributive=is_semidistributive(lat),
        subdirectly_irreducible=is_subdirectly_irreducible(lat),
        p_covers=[sorted(lat.names[x] for x in c) for c in covers],
    )
