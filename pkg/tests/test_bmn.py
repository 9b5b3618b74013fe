import pytest

from bmn import b22_into_bmn, bmn_dual_iso, bmn_structure_report, build_bmn, doubled_boolean
from errors import LatticeForgeError, SizeLimitError
from lattice import is_isomorphic, verify_embedding


@pytest.mark.parametrize("m,n", [(0, 1), (1, 0), (1, 1), (2, 1), (1, 3), (2, 2), (3, 3)])
def test_counts(m, n):
    k = m + n
    lattice = build_bmn(m, n).lattice
    assert lattice.size == 2**k + 1
    assert len(lattice.covers) == k * 2 ** (k - 1) + 1
    assert len(lattice.ji) == m + n + 1


def test_element_ids(b22):
    assert b22.element(a=(1, 2)) == b22.a == 3
    assert b22.element(b=(1,)) == 4
    assert b22.p == 16
    assert b22.lattice.names[b22.p] == "p"
    assert b22.lattice.names[b22.element(a=(2,), b=(2,))] == "a2+b2"


def test_p_sits_between_a_and_its_upper_covers(b22):
    lattice = b22.lattice
    assert lattice.lower_covers[b22.p] == (b22.a,)
    assert set(lattice.upper_covers[b22.p]) == {b22.element(a=(1, 2), b=(1,)), b22.element(a=(1, 2), b=(2,))}
    assert not lattice.leq(b22.p, b22.a)


def test_matches_generic_doubling():
    assert is_isomorphic(doubled_boolean(2, 2), build_bmn(2, 2).lattice)
    assert is_isomorphic(doubled_boolean(1, 2), build_bmn(1, 2).lattice)


@pytest.mark.parametrize("m,n", [(1, 2), (2, 2), (3, 1)])
def test_dual_isomorphism(m, n):
    mapping = bmn_dual_iso(m, n)
    assert mapping.is_surjective()


def test_b22_embeds_into_larger(b22):
    assert verify_embedding(b22_into_bmn(3, 2))
    with pytest.raises(LatticeForgeError):
        b22_into_bmn(1, 2)


def test_structure_report():
    report = bmn_structure_report(2, 2)
    assert report.size == 17
    assert report.bounded and report.semidistributive and report.subdirectly_irreducible
    assert report.p_covers == [["a1", "a2", "b1"], ["a1", "a2", "b2"]]


def test_atom_limit():
    with pytest.raises(SizeLimitError):
        build_bmn(7, 6)
