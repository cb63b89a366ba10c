"""Command-line front end.

Verbs: validate-kernel, eval, sweep-uniform, sweep-modular,
check-inequality, check-rate, report.  A single JSON config file seeds
every run; individual flags override the file, and the effective config
(hash included) is echoed into every report.
"""

from __future__ import annotations

import argparse
import sys

from .harness import (
    ExperimentConfig,
    emit_report,
    report_from_json,
    run_eval,
    run_modular_convergence,
    run_modular_inequality,
    run_rate_suite,
    run_uniform_convergence,
    run_validate_kernel,
)

_RUNNERS = {
    "validate-kernel": run_validate_kernel,
    "eval": run_eval,
    "sweep-uniform": run_uniform_convergence,
    "sweep-modular": run_modular_convergence,
    "check-inequality": run_modular_inequality,
    "check-rate": run_rate_suite,
}


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags override its fields")
    p.add_argument("--kernel", help="logistic | tanh | ramp | step | path/to/table.csv")
    p.add_argument("--phi", help="phi spec, e.g. power(p=2), zygmund:alpha=1,beta=1")
    p.add_argument("--function", help="corpus member: f1 .. f5")
    p.add_argument("--n", help="comma-separated n list, e.g. 8,16,32")
    p.add_argument("--lambda", dest="lambdas", help="comma-separated list or 'scan'")
    p.add_argument("--grid", type=int, help="grid panel count (even, >= 64)")
    p.add_argument("--out", help="output directory")
    p.add_argument("--format", help="comma-separated: csv,json,svg")
    p.add_argument("--seed", type=int, help="seed recorded in report metadata")
    p.add_argument("--workers", type=int, help="parallel map width (default 1)")


def _config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    config = (
        ExperimentConfig.from_json(args.config) if args.config else ExperimentConfig()
    )
    overrides: dict = {
        "kernel": args.kernel,
        "phi": args.phi,
        "function": args.function,
        "grid": args.grid,
        "out_dir": args.out,
        "seed": args.seed,
        "workers": args.workers,
    }
    if args.n:
        overrides["n_list"] = tuple(int(v) for v in args.n.split(","))
    if args.lambdas:
        if args.lambdas.strip() == "scan":
            overrides["lambda_policy"] = "scan"
        else:
            overrides["lambda_policy"] = "fixed"
            overrides["lambdas"] = tuple(float(v) for v in args.lambdas.split(","))
    if args.format:
        overrides["formats"] = tuple(args.format.split(","))
    return config.override(**overrides)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mpkanto",
        description=(
            "Max-product Kantorovich operator toolkit: kernel validation, "
            "convergence sweeps, modular inequalities, and rate certificates."
        ),
    )
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb in _RUNNERS:
        p = sub.add_parser(verb)
        _add_common_flags(p)
    rp = sub.add_parser("report", help="re-emit a saved JSON report")
    rp.add_argument("--in", dest="input", required=True, help="saved report JSON")
    rp.add_argument("--format", default="csv", help="comma-separated: csv,json,svg")
    rp.add_argument("--out", default=None, help="output directory")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.verb == "report":
        report = report_from_json(args.input)
        paths = emit_report(
            report, formats=tuple(args.format.split(",")), out_dir=args.out
        )
        for path in paths:
            print(path)
        return 0

    config = _config_from_args(args)
    report = _RUNNERS[args.verb](config)
    paths = emit_report(report)
    print(f"{args.verb}: config {config.config_hash}")
    for key, value in report.summary.items():
        print(f"  {key}: {value}")
    for note in report.metadata["warnings"]:
        print(f"  warning: {note}")
    for path in paths:
        print(f"  wrote {path}")
    return 0 if report.summary.get("passed", True) else 1


if __name__ == "__main__":
    sys.exit(main())
