"""Read and write lattice, measure, identity and report JSON files.

Lattice files store covers rather than the full order; the reader rebuilds
the order by reflexive-transitive closure and validates lattice-ness.
Lattices of pair sets also store their elements so that Cambrian and
permutohedron files can be reopened with the same ids.

Lattice, measure and identity files are inputs: problems raise ParseError.
The reproduce report is an output: a missing or corrupt report is replaced
by an empty one with a warning.
"""

import json
import logging
from collections import Counter
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Optional

from config import DEFAULT_TABLE_LIMIT
from errors import LatticeForgeError, ParseError
from identities import Identity, identity_from_dict, identity_to_dict
from lattice import FiniteLattice, LatticeMap
from measures import PolarizedMeasure
from weak_order import PairSet

logger = logging.getLogger(__name__)

Report = dict[str, Any]


def _write_json(data: Any, path: str) -> None:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(json.dumps(data, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def _read_json(path: str) -> Any:
    p = Path(path)
    if not p.exists():
        raise ParseError(f"file not found: {path}")
    text = p.read_text(encoding="utf-8").strip()
    if not text:
        raise ParseError(f"file is empty: {path}")
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"{path} is not valid JSON ({e})") from e


# -- lattices ---------------------------------------------------------------------


def lattice_to_dict(lattice: FiniteLattice) -> dict[str, Any]:
    data: dict[str, Any] = {
        "n": lattice.size,
        "names": list(lattice.names),
        "covers": [list(c) for c in lattice.covers],
    }
    elements = lattice.elements
    if elements and all(isinstance(e, PairSet) for e in elements):
        data["pairsets"] = {
            "ground": elements[0].n,
            "elements": [[list(p) for p in e.pairs()] for e in elements],
        }
    return data


def lattice_from_dict(data: Any, table_limit: int = DEFAULT_TABLE_LIMIT) -> FiniteLattice:
    """Rebuild a lattice from its covers.

    Raises:
        ParseError: If fields are missing or malformed.
        NotAPosetError, NotALatticeError: If the covers do not describe a lattice.
    """
    if not isinstance(data, dict):
        raise ParseError("lattice description must be a JSON object")
    try:
        size = int(data["n"])
        covers = [(int(a), int(b)) for a, b in data["covers"]]
        names = data.get("names")
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"invalid lattice description: {e}") from e
    if names is not None and not isinstance(names, list):
        raise ParseError("names must be a list")
    if names is not None and len(names) != size:
        raise ParseError(f"{len(names)} names for {size} elements")
    duplicates = sorted(name for name, count in Counter(map(str, names or ())).items() if count > 1)
    if duplicates:
        raise ParseError(f"duplicate element names: {', '.join(duplicates)}")

    elements = None
    pairsets = data.get("pairsets")
    if pairsets is not None:
        try:
            ground = int(pairsets["ground"])
            elements = [
                PairSet.from_pairs(ground, [tuple(p) for p in e]) for e in pairsets["elements"]
            ]
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError(f"invalid pair set elements: {e}") from e
        if len(elements) != size:
            raise ParseError(f"{len(elements)} pair sets for {size} elements")

    lattice = FiniteLattice.from_order(
        size, covers, names=names, elements=elements, table_limit=table_limit
    )
    if len(lattice.covers) != len(set(covers)):
        logger.debug(f"{len(set(covers)) - len(lattice.covers)} listed pairs are not covers")
    return lattice


def write_lattice(lattice: FiniteLattice, path: str) -> None:
    _write_json(lattice_to_dict(lattice), path)
    logger.info(f"Lattice with {lattice.size} elements saved to {path}")


def read_lattice(path: str, table_limit: int = DEFAULT_TABLE_LIMIT) -> FiniteLattice:
    lattice = lattice_from_dict(_read_json(path), table_limit)
    logger.info(f"Loaded {lattice!r} from {path}")
    return lattice


# -- maps -------------------------------------------------------------------------


def map_to_dict(mapping: LatticeMap) -> dict[str, Any]:
    return {
        "source": mapping.source.size,
        "target": mapping.target.size,
        "images": list(mapping.images),
        "pairs": [
            [mapping.source.names[x], mapping.target.names[y]] for x, y in enumerate(mapping.images)
        ],
    }


def write_map(mapping: LatticeMap, path: str) -> None:
    _write_json(map_to_dict(mapping), path)
    logger.info(f"Map on {mapping.source.size} elements saved to {path}")


# -- measures ---------------------------------------------------------------------


def measure_to_dict(mu: PolarizedMeasure, target_file: Optional[str] = None) -> dict[str, Any]:
    """The target is stored inline unless a lattice file is named."""
    target: Any = {"file": target_file} if target_file else lattice_to_dict(mu.target)
    return {
        "chain": list(mu.chain),
        "u": sorted(mu.u),
        "target": target,
        "values": [[x, y, v] for (x, y), v in sorted(mu.values.items())],
    }


def measure_from_dict(data: Any, base_dir: Optional[Path] = None) -> PolarizedMeasure:
    if not isinstance(data, dict):
        raise ParseError("measure description must be a JSON object")
    try:
        target_ref = data["target"]
        if isinstance(target_ref, dict) and "file" in target_ref:
            target_path = Path(target_ref["file"])
            if base_dir is not None and not target_path.is_absolute():
                target_path = base_dir / target_path
            target = read_lattice(str(target_path))
        else:
            target = lattice_from_dict(target_ref)
        values = {(int(x), int(y)): int(v) for x, y, v in data["values"]}
        chain = tuple(int(x) for x in data["chain"])
        u = frozenset(int(x) for x in data.get("u", []))
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"invalid measure description: {e}") from e
    if any(not 0 <= v < target.size for v in values.values()):
        raise ParseError("measure value out of range of the target lattice")
    try:
        return PolarizedMeasure(chain, u, target, values)
    except LatticeForgeError as e:
        raise ParseError(f"invalid measure: {e}") from e


def write_measure(mu: PolarizedMeasure, path: str, target_file: Optional[str] = None) -> None:
    _write_json(measure_to_dict(mu, target_file), path)
    logger.info(f"Measure on {mu.length} points saved to {path}")


def read_measure(path: str) -> PolarizedMeasure:
    return measure_from_dict(_read_json(path), Path(path).parent)


# -- identities -------------------------------------------------------------------


def write_identity(identity: Identity, path: str) -> None:
    _write_json(identity_to_dict(identity), path)


def read_identity(path: str) -> Identity:
    data = _read_json(path)
    if not isinstance(data, dict):
        raise ParseError("identity description must be a JSON object")
    identity = identity_from_dict(data)
    if not identity.name:
        identity = Identity(identity.lhs, identity.rhs, identity.relation, identity.varcount, Path(path).stem)
    return identity


# -- reproduce reports ------------------------------------------------------------


def _default_report() -> Report:
    return {"version": 1, "generated_at": None, "passed": None, "claims": []}


def load_report(path: str) -> Report:
    """Load a previous report; missing, empty or corrupt files give an empty report."""
    try:
        p = Path(path)
        if not p.exists():
            logger.info("Report file not found; starting with an empty report")
            return _default_report()
        text = p.read_text(encoding="utf-8").strip()
        if not text:
            logger.warning("Report file is empty; starting with an empty report")
            return _default_report()
        report = json.loads(text)
        if not isinstance(report, dict):
            raise ValueError("report is not a JSON object")
        for key, value in _default_report().items():
            report.setdefault(key, value)
        return report
    except (json.JSONDecodeError, ValueError) as e:
        logger.warning(f"Report file is corrupt ({e}); starting with an empty report")
        return _default_report()


def save_report(report: Report, path: str) -> None:
    report["generated_at"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    _write_json(report, path)
    logger.info(f"Report saved to {path}")
