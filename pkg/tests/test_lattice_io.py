import json

import pytest

from errors import NotALatticeError, ParseError
from identities import veg1
from lattice import LatticeMap
from lattice_io import (
    load_report,
    read_identity,
    read_lattice,
    read_measure,
    save_report,
    write_identity,
    write_lattice,
    write_map,
    write_measure,
)
from measures import bm1_measure, is_polarized


def test_lattice_round_trip(tmp_path, pentagon):
    path = tmp_path / "n5.json"
    write_lattice(pentagon, str(path))
    data = json.loads(path.read_text(encoding="utf-8"))
    assert data["n"] == 5
    assert "pairsets" not in data
    loaded = read_lattice(str(path))
    assert loaded.names == pentagon.names
    assert loaded.covers == pentagon.covers


def test_pair_sets_keep_their_ids(tmp_path, a3_4):
    path = tmp_path / "nested" / "a3.json"
    write_lattice(a3_4, str(path))
    loaded = read_lattice(str(path))
    assert loaded.elements == a3_4.elements
    assert loaded.covers == a3_4.covers


def test_missing_and_malformed_files(tmp_path):
    with pytest.raises(ParseError):
        read_lattice(str(tmp_path / "missing.json"))
    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding="utf-8")
    with pytest.raises(ParseError):
        read_lattice(str(broken))
    empty = tmp_path / "empty.json"
    empty.write_text("", encoding="utf-8")
    with pytest.raises(ParseError):
        read_lattice(str(empty))
    fields = tmp_path / "fields.json"
    fields.write_text(json.dumps({"n": 2}), encoding="utf-8")
    with pytest.raises(ParseError):
        read_lattice(str(fields))


def test_covers_that_are_not_a_lattice(tmp_path):
    path = tmp_path / "vee.json"
    path.write_text(json.dumps({"n": 3, "covers": [[0, 1], [0, 2]]}), encoding="utf-8")
    with pytest.raises(NotALatticeError):
        read_lattice(str(path))


def test_duplicate_names_are_rejected(tmp_path):
    path = tmp_path / "dup.json"
    path.write_text(
        json.dumps({"n": 3, "covers": [[0, 1], [1, 2]], "names": ["0", "x", "x"]}), encoding="utf-8"
    )
    with pytest.raises(ParseError, match="duplicate element names: x"):
        read_lattice(str(path))


def test_names_must_be_a_list(tmp_path):
    path = tmp_path / "names.json"
    path.write_text(json.dumps({"n": 2, "covers": [[0, 1]], "names": 7}), encoding="utf-8")
    with pytest.raises(ParseError):
        read_lattice(str(path))


def test_table_limit_reaches_the_lattice(tmp_path, pentagon):
    path = tmp_path / "n5.json"
    write_lattice(pentagon, str(path))
    small = read_lattice(str(path), 3)
    assert small.table_limit == 3
    assert small._tables is None
    assert read_lattice(str(path))._tables is not None
    meet, join = small.operation_tables()
    assert meet.tolist() == [[pentagon.meet(x, y) for y in range(5)] for x in range(5)]
    assert join.tolist() == [[pentagon.join(x, y) for y in range(5)] for x in range(5)]


def test_measure_with_target_file(tmp_path):
    mu = bm1_measure(2)
    write_lattice(mu.target, str(tmp_path / "b21.json"))
    write_measure(mu, str(tmp_path / "mu.json"), target_file="b21.json")
    loaded = read_measure(str(tmp_path / "mu.json"))
    assert loaded.values == mu.values
    assert loaded.u == mu.u
    assert is_polarized(loaded)


def test_measure_value_out_of_range(tmp_path):
    mu = bm1_measure(1)
    path = tmp_path / "mu.json"
    write_measure(mu, str(path))
    data = json.loads(path.read_text(encoding="utf-8"))
    data["values"][0][2] = 99
    path.write_text(json.dumps(data), encoding="utf-8")
    with pytest.raises(ParseError):
        read_measure(str(path))


def test_identity_file(tmp_path):
    path = tmp_path / "veg1.json"
    write_identity(veg1(), str(path))
    assert read_identity(str(path)) == veg1()

    unnamed = tmp_path / "mine.json"
    unnamed.write_text(json.dumps({"vars": 2, "lhs": "x0", "rhs": "(join x0 x1)"}), encoding="utf-8")
    assert read_identity(str(unnamed)).name == "mine"


def test_map_file(tmp_path, three_chain, square):
    path = tmp_path / "map.json"
    write_map(LatticeMap(three_chain, square, (0, 1, 3)), str(path))
    data = json.loads(path.read_text(encoding="utf-8"))
    assert data["images"] == [0, 1, 3]
    assert data["pairs"][2] == ["2", "e1+e2"]


def test_report_files(tmp_path):
    path = tmp_path / "report.json"
    assert load_report(str(path))["claims"] == []
    path.write_text("[1, 2]", encoding="utf-8")
    assert load_report(str(path))["passed"] is None
    path.write_text("{oops", encoding="utf-8")
    assert load_report(str(path))["claims"] == []

    save_report({"version": 1, "passed": True, "claims": [{"claim_id": "counts"}]}, str(path))
    report = load_report(str(path))
    assert report["passed"] is True
    assert report["generated_at"]
