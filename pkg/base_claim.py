"""
Base class for every claim check in the suite.
Runs the measurement, applies the configured verdict factors and turns any
failure into an INCONCLUSIVE report so the suite always completes.
"""

from typing import Any, Dict, Optional

from config import ExperimentConfig
from reports import ClaimReport, inconclusive_report, rejudge


class BaseClaim:
    """
    One analytic assertion measured against numerical error.

    Subclasses set claim_id and paper_ref and implement measure().
    """

    claim_id: str = ""
    paper_ref: str = ""

    def __init__(self, name: str, config: ExperimentConfig):
        """
        Args:
            name: Human-readable claim name for status lines
            config: Validated experiment configuration
        """
        self.name = name
        self.config = config
        self.params = config.params
        self.grid = config.make_grid()

    def measure(self) -> ClaimReport:
        raise NotImplementedError

    def context(self) -> Dict[str, Any]:
        """Parameters attached to every report of this claim."""
        return {
            "params": {
                "nu": self.params.nu,
                "alpha": self.params.alpha,
                "epsilon": self.params.epsilon,
                "n": self.params.n,
            },
            "grid": {"n_points": self.grid.n_points, "length": self.grid.length},
        }

    def execute(self) -> ClaimReport:
        """
        Measure the claim and judge it; never raises.

        Returns:
            ClaimReport: the judged report, or an INCONCLUSIVE one carrying
            the exception type and message when the measurement failed
        """
        tolerances = self.config.tolerances
        try:
            report = self.measure()
        except Exception as exc:
            print(f"✗ {self.name} failed: {type(exc).__name__}: {exc}")
            return self.failure(exc)
        metadata = dict(self.context(), **report.metadata)
        report = report.model_copy(update={"metadata": metadata})
        return rejudge(report, tolerances.support_factor, tolerances.refute_factor)

    def failure(self, exc: BaseException, extra: Optional[Dict[str, Any]] = None) -> ClaimReport:
        metadata = dict(self.context(), exception=type(exc).__name__, **(extra or {}))
        return inconclusive_report(self.claim_id, self.paper_ref, str(exc) or type(exc).__name__, metadata)
