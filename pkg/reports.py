"""
Claim reports - the structured verdict for every claim under test.
Provides the verdict rule, report constructors and an ordered ledger that
writes newline-delimited JSON.
"""

import json
import math
from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, Field, field_validator

SUPPORT_FACTOR = 10.0
REFUTE_FACTOR = 100.0


class Verdict(str, Enum):
    SUPPORTED = "SUPPORTED"
    REFUTED = "REFUTED"
    INCONCLUSIVE = "INCONCLUSIVE"


def decide_verdict(
    residual: float,
    error_estimate: float,
    support_factor: float = SUPPORT_FACTOR,
    refute_factor: float = REFUTE_FACTOR,
) -> Verdict:
    """SUPPORTED iff residual <= support·error, REFUTED iff residual > refute·error."""
    if residual <= support_factor * error_estimate:
        return Verdict.SUPPORTED
    if residual > refute_factor * error_estimate:
        return Verdict.REFUTED
    return Verdict.INCONCLUSIVE


def numerical_floor(n_samples: int) -> float:
    """Rounding floor for a sum over n_samples terms."""
    return 8.0 * n_samples * np.finfo(float).eps


def _plain(value: Any) -> Any:
    """Convert numpy scalars/arrays and nested containers into JSON-ready values."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else repr(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


class ClaimReport(BaseModel):
    """Verdict comparing a measured residual against its numerical error estimate."""

    claim_id: str
    paper_ref: str
    residual: float
    error_estimate: float
    verdict: Verdict
    metadata: Dict[str, Any] = Field(default_factory=dict)

    @field_validator("residual", "error_estimate")
    @classmethod
    def _finite_nonnegative(cls, value: float, info) -> float:
        if not math.isfinite(value) or value < 0:
            raise ValueError(f"{info.field_name} must be finite and nonnegative, got {value}")
        return value

    @field_validator("metadata")
    @classmethod
    def _json_ready(cls, value: Dict[str, Any]) -> Dict[str, Any]:
        return _plain(value)

    def to_json(self) -> str:
        record = {
            "claim_id": self.claim_id,
            "paper_ref": self.paper_ref,
            "residual": self.residual,
            "error": self.error_estimate,
            "verdict": self.verdict.value,
            "metadata": self.metadata,
        }
        return json.dumps(record, sort_keys=True, ensure_ascii=False)


def make_report(
    claim_id: str,
    paper_ref: str,
    residual: float,
    error_estimate: float,
    metadata: Optional[Dict[str, Any]] = None,
    support_factor: float = SUPPORT_FACTOR,
    refute_factor: float = REFUTE_FACTOR,
) -> ClaimReport:
    metadata = dict(metadata or {})
    residual = float(residual)
    error_estimate = float(error_estimate)
    if not (math.isfinite(residual) and math.isfinite(error_estimate)):
        metadata.update(raw_residual=repr(residual), raw_error=repr(error_estimate))
        return inconclusive_report(claim_id, paper_ref, "non-finite residual or error estimate", metadata)
    metadata.update(support_factor=support_factor, refute_factor=refute_factor)
    return ClaimReport(
        claim_id=claim_id,
        paper_ref=paper_ref,
        residual=abs(residual),
        error_estimate=abs(error_estimate),
        verdict=decide_verdict(abs(residual), abs(error_estimate), support_factor, refute_factor),
        metadata=metadata,
    )


def inconclusive_report(
    claim_id: str, paper_ref: str, diagnostic: str, metadata: Optional[Dict[str, Any]] = None
) -> ClaimReport:
    metadata = dict(metadata or {})
    metadata["diagnostic"] = diagnostic
    return ClaimReport(
        claim_id=claim_id,
        paper_ref=paper_ref,
        residual=0.0,
        error_estimate=0.0,
        verdict=Verdict.INCONCLUSIVE,
        metadata=metadata,
    )


def rejudge(report: ClaimReport, support_factor: float, refute_factor: float) -> ClaimReport:
    """Re-apply the verdict rule with configured factors; error reports stay INCONCLUSIVE."""
    if "diagnostic" in report.metadata:
        return report
    metadata = dict(report.metadata, support_factor=support_factor, refute_factor=refute_factor)
    return report.model_copy(update={
        "verdict": decide_verdict(report.residual, report.error_estimate, support_factor, refute_factor),
        "metadata": metadata,
    })


class ReportLedger:
    """In-memory ledger of claim reports, ordered by claim_id on read."""

    def __init__(self):
        self._reports: Dict[str, ClaimReport] = {}

    def add(self, report: ClaimReport):
        self._reports[report.claim_id] = report

    def ordered(self) -> List[ClaimReport]:
        return [self._reports[key] for key in sorted(self._reports)]

    def to_ndjson(self) -> str:
        return "".join(report.to_json() + "\n" for report in self.ordered())

    def write(self, path: str) -> str:
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(self.to_ndjson())
        return path

    def summary(self) -> Dict[str, int]:
        counts = {verdict.value: 0 for verdict in Verdict}
        for report in self._reports.values():
            counts[report.verdict.value] += 1
        return counts
