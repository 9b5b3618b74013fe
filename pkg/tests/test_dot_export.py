import pytest

from dot_export import hasse_diagram, write_dot
from errors import SizeLimitError
from lattice import chain
from weak_order import build_permutohedron


def test_two_chain():
    source = hasse_diagram(chain(2), title="two").source
    assert "rankdir=BT" in source
    assert source.count("->") == 1
    assert "0 -> 1" in source


def test_pentagon(pentagon):
    source = hasse_diagram(pentagon).source
    assert source.count("->") == 5
    assert source.count("doublecircle") == 3
    assert "rank=same" in source


def test_hexagon():
    source = hasse_diagram(build_permutohedron(3)).source
    assert source.count("->") == 6
    assert "label=321" in source


def test_size_limit(pentagon):
    with pytest.raises(SizeLimitError):
        hasse_diagram(pentagon, max_size=4)


def test_write_dot(tmp_path, pentagon):
    path = tmp_path / "out" / "n5.dot"
    write_dot(pentagon, str(path), title="n5")
    text = path.read_text(encoding="utf-8")
    assert text.startswith("digraph n5 {")
