import csv
import os
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import List

import numpy as np

from claims import build_claims
from codomain import invert_solution, sweep_spectrum
from config import ExperimentConfig
from fields import Field, field_to_csv
from refsolver import solve, trajectory_to_csv
from reports import ClaimReport, ReportLedger

SWEEP_QUANTITIES = ("F_of_s", "u_of_x", "trajectory")


class ClaimSuiteOrchestrator:
    """Runs every claim check for one configuration and assembles the ordered report ledger."""

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.claims = build_claims(config)
        self.ledger = ReportLedger()
        print(f"✓ Claim suite initialized with {len(self.claims)} claims")

    def run(self) -> List[ClaimReport]:
        """Execute the claims concurrently; reports come back sorted by claim_id."""
        print("\n" + "=" * 60)
        print("NWS CLAIM SUITE")
        print("=" * 60)
        total = len(self.claims)
        with ThreadPoolExecutor(max_workers=self.config.run.workers) as pool:
            futures = {pool.submit(claim.execute): claim for claim in self.claims}
            for done, future in enumerate(as_completed(futures), 1):
                claim = futures[future]
                report = future.result()
                self.ledger.add(report)
                marker = "⚠" if "diagnostic" in report.metadata else "✓"
                print(f"[{done}/{total}] {marker} {claim.name}: {report.verdict.value}")

        counts = self.ledger.summary()
        print("\n" + "=" * 60)
        print("✓ CLAIM SUITE COMPLETE: " + ", ".join(f"{k}={v}" for k, v in counts.items()))
        print("=" * 60)
        return self.ledger.ordered()

    def write_reports(self) -> str:
        path = self.config.outputs.report_path
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        self.ledger.write(path)
        print(f"\n✓ Reports saved to {path}")
        return path


def run_claim_suite(config: ExperimentConfig, write: bool = True) -> List[ClaimReport]:
    orchestrator = ClaimSuiteOrchestrator(config)
    reports = orchestrator.run()
    if write:
        orchestrator.write_reports()
    return reports


def initial_field(config: ExperimentConfig) -> Field:
    """Initial data for the reference solver as configured by initial_kind."""
    grid = config.make_grid()
    initial = config.initial
    if initial.kind == "zero":
        return Field(grid, np.zeros(grid.n_points))
    if initial.kind == "uniform":
        return Field(grid, np.full(grid.n_points, initial.amplitude * config.params.equilibrium))
    return Field.from_function(
        grid, lambda x: initial.amplitude * np.exp(-np.square(x) / initial.width ** 2)
    )


def _write_spectrum_sweep(config: ExperimentConfig, path: str) -> str:
    sgrid = config.make_grid().dual()
    s_values = sgrid.frequencies[sgrid.origin_index:]
    rows = sweep_spectrum(config.params, config.time.t_end, s_values)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["s", "t", "F", "error_estimate"])
        for row in rows:
            writer.writerow([repr(float(value)) for value in row])
    return path


def export_sweep(config: ExperimentConfig, quantity: str) -> str:
    """
    Write one plot-ready CSV into csv_dir.

    Args:
        config: Validated experiment configuration
        quantity: One of F_of_s, u_of_x, trajectory

    Returns:
        str: Path of the written file
    """
    if quantity not in SWEEP_QUANTITIES:
        raise ValueError(f"quantity must be one of {SWEEP_QUANTITIES}, got {quantity!r}")
    os.makedirs(config.outputs.csv_dir, exist_ok=True)
    path = os.path.join(config.outputs.csv_dir, f"{quantity}.csv")

    if quantity == "F_of_s":
        _write_spectrum_sweep(config, path)
    elif quantity == "u_of_x":
        field, _, _ = invert_solution(config.params, config.time.t_end, config.make_grid())
        field_to_csv(field, path)
    else:
        trajectory = solve(
            initial_field(config), config.time.t_end, config.time.dt, config.params,
            record_every=config.time.record_every,
        )
        trajectory_to_csv(trajectory, path)

    print(f"✓ {quantity} written to {path}")
    return path
