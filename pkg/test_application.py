#!/usr/bin/env python3
"""
End-to-end tests of the claim suite through the orchestrator
"""
import csv
import json
import sys

import pytest

from base_claim import BaseClaim
from claims import CLAIM_TYPES, build_claims, codomain_lattice
from config import ConfigError, load_experiment_config
from orchestrator import ClaimSuiteOrchestrator, export_sweep, initial_field, run_claim_suite
from reports import Verdict

CLAIM_IDS = sorted(claim_type.claim_id for _, claim_type in CLAIM_TYPES)


def small_config(tmp_path, **overrides):
    values = {"s_lattice": "5", "t_lattice": "3", "workers": "4"}
    values.update({key: str(value) for key, value in overrides.items()})
    return load_experiment_config(overrides=values, out_dir=str(tmp_path))


def by_id(reports):
    return {report.claim_id: report for report in reports}


def test_every_claim_is_built_once():
    claims = build_claims(load_experiment_config())
    assert sorted(claim.claim_id for claim in claims) == CLAIM_IDS
    assert len(CLAIM_IDS) == 10
    assert all(claim.paper_ref for claim in claims)


def test_lattice_straddles_the_branch_point(tmp_path):
    s_samples, t_samples = codomain_lattice(small_config(tmp_path))
    assert len(s_samples) == 5 + 3
    assert len(t_samples) == 3
    s_star = s_samples[5]
    assert s_samples[6] < s_star < s_samples[7]


def test_default_suite_verdicts(tmp_path):
    config = small_config(tmp_path)
    reports = run_claim_suite(config)
    assert [report.claim_id for report in reports] == CLAIM_IDS
    verdicts = {claim_id: report.verdict for claim_id, report in by_id(reports).items()}
    for claim_id in ("exponent-property", "scalar-distribution", "null-inverse-transform",
                     "linear-ansatz", "neumann-convergence"):
        assert verdicts[claim_id] == Verdict.REFUTED, claim_id
    assert verdicts["fujita-zero"] == Verdict.SUPPORTED
    assert by_id(reports)["exponent-property"].metadata["random_engine_gap"] < 1e-10

    lines = open(config.outputs.report_path, encoding="utf-8").read().splitlines()
    assert [json.loads(line)["claim_id"] for line in lines] == CLAIM_IDS
    record = json.loads(lines[0])
    assert record["metadata"]["params"]["epsilon"] == 1.0


def test_reruns_are_byte_identical(tmp_path):
    first = small_config(tmp_path / "a")
    second = small_config(tmp_path / "b", workers=1)
    run_claim_suite(first)
    run_claim_suite(second)
    a = open(first.outputs.report_path, "rb").read()
    b = open(second.outputs.report_path, "rb").read()
    assert a == b


def test_suite_without_nonlinearity(tmp_path):
    reports = by_id(run_claim_suite(small_config(tmp_path, epsilon=0.0), write=False))
    for claim_id in ("fujita-zero", "linear-ansatz", "neumann-convergence",
                     "separated-solution", "bernoulli-exactness"):
        assert reports[claim_id].verdict == Verdict.SUPPORTED, claim_id


def test_cubic_power_reports_inapplicable_claims(tmp_path):
    reports = by_id(run_claim_suite(small_config(tmp_path, n=3), write=False))
    assert [report.claim_id for report in reports.values()] == CLAIM_IDS
    for claim_id in ("erf-formula", "neumann-convergence"):
        report = reports[claim_id]
        assert report.verdict == Verdict.INCONCLUSIVE
        assert report.metadata["exception"] == "ValueError"
        assert "diagnostic" in report.metadata


def test_failing_claim_does_not_stop_the_suite(tmp_path):
    class Exploding(BaseClaim):
        claim_id = "exploding"
        paper_ref = "none"

        def measure(self):
            raise ZeroDivisionError("boom")

    config = small_config(tmp_path)
    orchestrator = ClaimSuiteOrchestrator(config)
    orchestrator.claims = [Exploding("Exploding", config)]
    (report,) = orchestrator.run()
    assert report.verdict == Verdict.INCONCLUSIVE
    assert report.metadata["diagnostic"] == "boom"
    assert report.metadata["exception"] == "ZeroDivisionError"


def test_invalid_configuration_is_rejected_before_running():
    with pytest.raises(ConfigError):
        load_experiment_config(overrides={"dt": "0"})


def test_sweep_exports(tmp_path):
    config = small_config(tmp_path, epsilon=0.0, initial_kind="zero", t_end=0.1)
    path = export_sweep(config, "F_of_s")
    lines = open(path).read().splitlines()
    assert lines[0] == "s,t,F,error_estimate"
    assert all(float(line.split(",")[2]) == 1.0 for line in lines[1:])
    with open(path, newline="") as handle:
        header, *records = list(csv.reader(handle))
    assert header == ["s", "t", "F", "error_estimate"]
    assert records and all(len(record) == 4 for record in records)
    assert [float(record[0]) for record in records] == sorted(float(record[0]) for record in records)

    path = export_sweep(config, "trajectory")
    rows = open(path).read().splitlines()[2:]
    assert rows and all(float(row.split(",")[2]) == 0.0 for row in rows)

    with pytest.raises(ValueError):
        export_sweep(config, "G_of_x")


def test_initial_field_kinds(tmp_path):
    uniform = initial_field(small_config(tmp_path, initial_kind="uniform", initial_amplitude=0.5))
    assert uniform.values.min() == uniform.values.max() == 0.5
    gaussian = initial_field(small_config(tmp_path, initial_amplitude=0.2))
    assert gaussian.sup_norm() == pytest.approx(0.2)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
