"""Command-line entry point.

Exit codes: 0 when every check passes, 1 when any check fails, 2 on a
configuration error.
"""

from __future__ import annotations

import argparse
import math
import sys

from .errors import ConfigError, IoError
from .harness.report import emit_report
from .harness.scaling import DEFAULT_DIMS, PROBES, run_scaling_experiment
from .harness.suites import SuiteConfig, run_chart_suite, run_groupoid_axiom_suite, run_selftest
from .matcore import ToleranceConfig

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _order(text: str) -> float:
    if text.lower() in ("inf", "infinity"):
        return math.inf
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a Schatten order: {text!r}")


def _dims(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad dimension list: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n-plus", type=int, default=4)
    common.add_argument("--n-minus", type=int, default=4)
    common.add_argument("--k", type=int, default=None, help="subspace dimension (default: n-plus)")
    common.add_argument("--trials", type=int, default=100)
    common.add_argument("--seed", type=int, default=7)
    common.add_argument("--tol", type=float, default=1e-9, help="operator-norm equality threshold")
    common.add_argument("--schatten-p", type=_order, default=2.0)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", default="-", help="output path, '-' for stdout")
    common.add_argument("--probe", choices=PROBES + ("all",), default="all")
    common.add_argument("--dims", type=_dims, default=list(DEFAULT_DIMS), help="comma-separated n values for scaling")

    parser = argparse.ArgumentParser(prog="partiso", description="Verify the partial-isometry groupoid over the truncated restricted Grassmannian.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("verify-groupoid", parents=[common], help="groupoid axiom suite")
    sub.add_parser("verify-charts", parents=[common], help="chart and atlas suite")
    sub.add_parser("scaling", parents=[common], help="truncation-scaling experiment")
    sub.add_parser("selftest", parents=[common], help="check that injected violations are detected")
    sub.add_parser("all", parents=[common], help="both suites plus the scaling experiment")
    return parser


def _config(args) -> SuiteConfig:
    try:
        tol = ToleranceConfig(tol_equal=args.tol)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return SuiteConfig(
        n_plus=args.n_plus,
        n_minus=args.n_minus,
        k=args.k,
        trials=args.trials,
        seed=args.seed,
        tolerances=tol,
        schatten_order=args.schatten_p,
    )


def _scaling(args):
    return run_scaling_experiment(args.dims, args.probe, args.schatten_p, args.seed)


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config(args)
        config = cfg.to_dict()
        config["command"] = args.command
        if args.command == "verify-groupoid":
            reports = [run_groupoid_axiom_suite(cfg)]
            ok = reports[0].ok
        elif args.command == "verify-charts":
            reports = [run_chart_suite(cfg)]
            ok = reports[0].ok
        elif args.command == "scaling":
            config.update(dims=args.dims, probe=args.probe)
            reports = [_scaling(args)]
            ok = reports[0].ok
        elif args.command == "selftest":
            results = run_selftest(cfg)
            reports = [r.report for r in results]
            config["selftest"] = {
                r.injection: {"detected": r.detected, "misattributed": r.misattributed, "ok": r.ok} for r in results
            }
            ok = all(r.ok for r in results)
        else:
            config.update(dims=args.dims, probe=args.probe)
            reports = [run_groupoid_axiom_suite(cfg), run_chart_suite(cfg), _scaling(args)]
            ok = all(r.ok for r in reports)
        emit_report(reports, args.format, args.out, config)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IoError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK if ok else EXIT_FAIL


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
