import argparse
import json
import logging
import os
import sys
from typing import List, Optional

from codomain import invert_solution
from config import ConfigError, ExperimentConfig, load_experiment_config, parse_overrides
from fields import field_to_csv
from kernels import heat_kernel, linear_propagator, spectral_kernel
from orchestrator import SWEEP_QUANTITIES, export_sweep, initial_field, run_claim_suite
from refsolver import solve, trajectory_to_csv

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nws-lab",
        description="Numerical laboratory for the NWS convolution-substitution claims",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment file with key=value lines")
    common.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                        help="override one configuration key (repeatable)")
    common.add_argument("--out", help="output directory for reports and CSV files")
    common.add_argument("--verbose", action="store_true", help="show numerical diagnostics")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("claims", parents=[common], help="run the claim suite")
    sweep = sub.add_parser("sweep", parents=[common], help="export a plot-ready CSV")
    sweep.add_argument("--quantity", choices=SWEEP_QUANTITIES, default="F_of_s")
    sub.add_parser("simulate", parents=[common], help="run the reference solver")
    kernel = sub.add_parser("kernel", parents=[common], help="evaluate the kernels")
    kernel.add_argument("--x", type=float, default=0.0)
    kernel.add_argument("--s", type=float, default=0.0)
    kernel.add_argument("--t", type=float, default=1.0)
    sub.add_parser("invert", parents=[common], help="inverse transform of the codomain solution")
    return parser


def _claims(config: ExperimentConfig, _args) -> int:
    run_claim_suite(config)
    return EXIT_OK


def _sweep(config: ExperimentConfig, args) -> int:
    export_sweep(config, args.quantity)
    return EXIT_OK


def _simulate(config: ExperimentConfig, _args) -> int:
    trajectory = solve(initial_field(config), config.time.t_end, config.time.dt, config.params,
                       record_every=config.time.record_every)
    os.makedirs(config.outputs.csv_dir, exist_ok=True)
    path = trajectory_to_csv(trajectory, os.path.join(config.outputs.csv_dir, "trajectory.csv"))
    if trajectory.blow_up:
        print(f"⚠ Blow-up at t={trajectory.blow_up_time:.6g}; trajectory truncated")
    print(f"✓ {len(trajectory.times)} states, final sup norm {trajectory.final.sup_norm():.6g}")
    print(f"✓ Trajectory saved to {path}")
    return EXIT_OK


def _kernel(config: ExperimentConfig, args) -> int:
    params = config.params
    values = {
        "x": args.x,
        "s": args.s,
        "t": args.t,
        "heat_kernel": float(heat_kernel(args.x, args.t, params)),
        "spectral_kernel": float(spectral_kernel(args.s, args.t, params)),
        "linear_propagator": float(linear_propagator(args.x, args.t, params)),
    }
    print(json.dumps(values, sort_keys=True))
    return EXIT_OK


def _invert(config: ExperimentConfig, _args) -> int:
    field, _, report = invert_solution(config.params, config.time.t_end, config.make_grid())
    os.makedirs(config.outputs.csv_dir, exist_ok=True)
    path = field_to_csv(field, os.path.join(config.outputs.csv_dir, "u_of_x.csv"))
    print(report.to_json())
    print(f"✓ Inverse transform saved to {path}")
    return EXIT_OK


COMMANDS = {
    "claims": _claims,
    "sweep": _sweep,
    "simulate": _simulate,
    "kernel": _kernel,
    "invert": _invert,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Main execution function; returns the process exit code."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        config = load_experiment_config(args.config, parse_overrides(args.param), args.out)
    except ConfigError as e:
        print(f"✗ Configuration error: {e}")
        return EXIT_CONFIG

    try:
        return COMMANDS[args.command](config, args)
    except Exception as e:
        import traceback
        print(f"\n✗ Error: {e}")
        traceback.print_exc()
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
