"""Hasse diagrams as DOT text through the graphviz package.

Nodes are the lattice ids labeled by element names, ranked by height with
the bottom drawn lowest; edges are the cover pairs. Join-irreducible
elements are drawn as double circles.
"""

import logging
from pathlib import Path

from graphviz import Digraph

from errors import SizeLimitError
from lattice import FiniteLattice

logger = logging.getLogger(__name__)

MAX_DOT_SIZE = 200


def hasse_diagram(lattice: FiniteLattice, title: str = "lattice", max_size: int = MAX_DOT_SIZE) -> Digraph:
    """Build the diagram.

    Raises:
        SizeLimitError: If the lattice has more than max_size elements.
    """
    if lattice.size > max_size:
        raise SizeLimitError(f"{lattice.size} elements exceed the diagram limit of {max_size}")
    dot = Digraph(title)
    dot.attr(rankdir="BT")
    dot.attr("node", shape="circle", fontsize="10")
    dot.attr("edge", arrowhead="none")

    ji = set(lattice.ji)
    levels: dict[int, list[int]] = {}
    for x, h in enumerate(lattice.heights()):
        levels.setdefault(h, []).append(x)
    for h in sorted(levels):
        with dot.subgraph(name=f"rank{h}") as rank:
            rank.attr(rank="same")
            for x in levels[h]:
                shape = "doublecircle" if x in ji else "circle"
                rank.node(str(x), label=lattice.names[x], shape=shape)
    for lower, upper in lattice.covers:
        dot.edge(str(lower), str(upper))
    return dot


def write_dot(lattice: FiniteLattice, path: str, title: str = "lattice", max_size: int = MAX_DOT_SIZE) -> None:
    dot = hasse_diagram(lattice, title, max_size)
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(dot.source, encoding="utf-8")
    logger.info(f"Diagram with {lattice.size} nodes and {len(lattice.covers)} edges saved to {path}")
