import pytest

import reproduce
from config import Config
from reproduce import (
    CLAIMS,
    ClaimResult,
    ReproduceOptions,
    ReproduceReport,
    catalan,
    claim_counts,
    claim_measure_embeddings,
    claim_splitting,
    claim_three_generated,
    claim_veg1_cambrian,
    claim_veg2_bmn,
    run_reproduce,
    veg1_witness_values,
)
from weak_order import PairSet


@pytest.fixture
def options():
    return ReproduceOptions.from_config(Config(), parallel=False, duality_cases=50)


def test_catalan():
    assert [catalan(n) for n in range(1, 7)] == [1, 2, 5, 14, 42, 132]


def test_options_from_config():
    options = ReproduceOptions.from_config(Config(threads=3), corrupt_splitting=True)
    assert options.threads == 3
    assert options.corrupt_splitting
    assert options.evaluation_budget == Config().evaluation_budget


def test_claim_ids_are_unique():
    ids = [claim_id for claim_id, _, _ in CLAIMS]
    assert len(ids) == len(set(ids)) == 12


def test_veg1_witness_values():
    a1, a2, b1, b2 = veg1_witness_values()
    assert a1 == PairSet.from_pairs(4, [(1, 3), (2, 3)])
    assert a2 == PairSet.from_pairs(4, [(2, 3), (2, 4)])
    assert b1 == PairSet.from_pairs(4, [(3, 4)])
    assert b2 == PairSet.from_pairs(4, [(1, 2)])


@pytest.mark.parametrize("claim", [claim_counts, claim_splitting, claim_veg1_cambrian, claim_measure_embeddings])
def test_claims_pass(claim, options):
    passed, detail = claim(options)
    assert passed, detail


def test_corrupted_splitting_fails(options):
    options.corrupt_splitting = True
    passed, detail = claim_splitting(options)
    assert not passed
    assert "(1,12) not in rhs" in detail


def test_exception_fails_only_its_claim(monkeypatch, options):
    def broken(_options):
        raise RuntimeError("boom")

    monkeypatch.setattr(reproduce, "CLAIMS", [("broken", "raises", broken), CLAIMS[0]])
    report = run_reproduce(options)
    assert [c.passed for c in report.claims] == [False, True]
    assert report.claims[0].detail == "RuntimeError: boom"
    assert not report.passed
    assert report.to_dict()["claims"][1]["claim_id"] == "counts"


@pytest.mark.slow
@pytest.mark.parametrize("claim", [claim_veg2_bmn, claim_three_generated])
def test_slow_claims_pass(claim, options):
    passed, detail = claim(options)
    assert passed, detail


def test_changes_since_previous_report():
    report = ReproduceReport(
        [
            ClaimResult("counts", "sizes", True, 0.1),
            ClaimResult("splitting-witness", "split", True, 0.2),
            ClaimResult("three-generated", "sizes", False, 0.3),
        ]
    )
    previous = {
        "claims": [
            {"claim_id": "counts", "passed": True},
            {"claim_id": "splitting-witness", "passed": False},
            {"claim_id": "three-generated", "passed": True},
        ]
    }
    assert report.changes_since(previous) == [
        "splitting-witness: FAIL -> PASS",
        "three-generated: PASS -> FAIL",
    ]


def test_changes_since_skips_unknown_claims():
    report = ReproduceReport([ClaimResult("counts", "sizes", False, 0.1)])
    assert report.changes_since({"version": 1, "generated_at": None, "passed": None, "claims": []}) == []
    assert report.changes_since({"claims": ["garbage", {"claim_id": "other", "passed": True}]}) == []


def test_only_filters_claims(options):
    report = run_reproduce(options, only=["counts"])
    assert [c.claim_id for c in report.claims] == ["counts"]
    assert report.passed


@pytest.mark.slow
def test_full_battery():
    options = ReproduceOptions.from_config(Config(), parallel=False)
    report = run_reproduce(options)
    assert report.passed, [c.detail for c in report.claims if not c.passed]
