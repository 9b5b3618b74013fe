import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from bmn import build_bmn  # noqa: E402
from cambrian import CambrianSpec, build_cambrian, tamari  # noqa: E402
from lattice import boolean_lattice, chain, m3, n5  # noqa: E402
from weak_order import build_permutohedron  # noqa: E402


@pytest.fixture
def pentagon():
    return n5()


@pytest.fixture
def diamond():
    return m3()


@pytest.fixture
def three_chain():
    return chain(3)


@pytest.fixture
def square():
    return boolean_lattice(2)


@pytest.fixture(scope="session")
def perm4():
    return build_permutohedron(4)


@pytest.fixture(scope="session")
def tamari4():
    return build_cambrian(tamari(4))


@pytest.fixture(scope="session")
def a3_4():
    """A_{3}(4)."""
    return build_cambrian(CambrianSpec.of(4, {3}))


@pytest.fixture(scope="session")
def b22():
    return build_bmn(2, 2)


SUITE = {
    "n5": n5,
    "m3": m3,
    "square": lambda: boolean_lattice(2),
    "b22": lambda: build_bmn(2, 2).lattice,
    "a3_4": lambda: build_cambrian(CambrianSpec.of(4, {3})),
    "a2_4": lambda: build_cambrian(CambrianSpec.of(4, {2})),
    "tamari4": lambda: build_cambrian(tamari(4)),
}


@pytest.fixture(scope="session", params=sorted(SUITE))
def suite_lattice(request):
    """Every small lattice the identity invariants are checked on."""
    return SUITE[request.param]()
