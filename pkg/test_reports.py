#!/usr/bin/env python3
"""
Tests for the verdict rule, claim reports and the NDJSON ledger
"""
import json
import sys

import numpy as np
import pytest

from reports import (
    ClaimReport,
    ReportLedger,
    Verdict,
    decide_verdict,
    inconclusive_report,
    make_report,
    rejudge,
)


@pytest.mark.parametrize(
    "residual, error, verdict",
    [
        (0.0, 0.0, Verdict.SUPPORTED),
        (1.0, 1.0, Verdict.SUPPORTED),
        (10.0, 1.0, Verdict.SUPPORTED),
        (10.5, 1.0, Verdict.INCONCLUSIVE),
        (100.0, 1.0, Verdict.INCONCLUSIVE),
        (101.0, 1.0, Verdict.REFUTED),
        (1e-3, 0.0, Verdict.REFUTED),
    ],
)
def test_verdict_rule(residual, error, verdict):
    assert decide_verdict(residual, error) == verdict


def test_report_rejects_bad_numbers():
    with pytest.raises(ValueError):
        ClaimReport(claim_id="x", paper_ref="p", residual=-1.0, error_estimate=0.0,
                    verdict=Verdict.SUPPORTED)
    with pytest.raises(ValueError):
        ClaimReport(claim_id="x", paper_ref="p", residual=float("inf"), error_estimate=0.0,
                    verdict=Verdict.SUPPORTED)


def test_non_finite_measurement_becomes_inconclusive():
    report = make_report("x", "p", float("nan"), 1.0)
    assert report.verdict == Verdict.INCONCLUSIVE
    assert report.residual == 0.0 and report.error_estimate == 0.0
    assert "diagnostic" in report.metadata


def test_metadata_is_json_ready():
    report = make_report("x", "p", 1e-3, 1.0, {
        "array": np.arange(3),
        "scalar": np.float64(2.5),
        "flag": np.bool_(True),
        "infinite": float("inf"),
        "nested": {"k": (np.int64(4), 1.5)},
    })
    record = json.loads(report.to_json())
    assert record["metadata"]["array"] == [0, 1, 2]
    assert record["metadata"]["scalar"] == 2.5
    assert record["metadata"]["flag"] is True
    assert record["metadata"]["infinite"] == "inf"
    assert record["metadata"]["nested"] == {"k": [4, 1.5]}
    assert set(record) == {"claim_id", "paper_ref", "residual", "error", "verdict", "metadata"}
    assert record["verdict"] == "SUPPORTED"


def test_rejudge_uses_new_factors_but_keeps_error_reports():
    report = make_report("x", "p", 5.0, 1.0)
    assert report.verdict == Verdict.SUPPORTED
    strict = rejudge(report, 1.0, 2.0)
    assert strict.verdict == Verdict.REFUTED
    assert strict.metadata["support_factor"] == 1.0

    failed = inconclusive_report("y", "p", "boom")
    assert rejudge(failed, 1.0, 2.0) is failed


def test_ledger_orders_by_claim_id(tmp_path):
    ledger = ReportLedger()
    for claim_id in ("zeta", "alpha", "mu"):
        ledger.add(make_report(claim_id, "p", 0.0, 1.0))
    assert [r.claim_id for r in ledger.ordered()] == ["alpha", "mu", "zeta"]
    lines = ledger.to_ndjson().splitlines()
    assert [json.loads(line)["claim_id"] for line in lines] == ["alpha", "mu", "zeta"]
    assert ledger.summary() == {"SUPPORTED": 3, "REFUTED": 0, "INCONCLUSIVE": 0}

    first = ledger.write(str(tmp_path / "a.ndjson"))
    second = ledger.write(str(tmp_path / "b.ndjson"))
    assert open(first, "rb").read() == open(second, "rb").read()


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
