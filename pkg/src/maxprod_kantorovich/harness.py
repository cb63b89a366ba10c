"""Experiment orchestration: configs, convergence sweeps, and reports.

Each run verb takes an ``ExperimentConfig`` and returns a ``SweepReport``
whose records carry everything the CSV/JSON schemas need.  Sweep cells
are independent; ``ordered_parallel_map`` evaluates them concurrently but
always assembles results in cell-key order, so reports are deterministic
regardless of worker count.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from ._version import __version__
from .functions import TestFunction, abs_diff, corpus, shift
from .kfunctional import (
    build_smoother_family,
    choose_lambda1,
    fidelity_profile,
    verify_rate_bound,
)
from .operator import (
    denominator_profile,
    eval_rows,
    evaluate_grid,
    evaluate_shifted_grid,
    index_set,
    make_operator,
)
from .orlicz import (
    GridFunction,
    modular,
    modular_distance,
    modular_on_grid,
    parse_phi_spec,
)
from .reporting import svg_loglog, write_csv, write_json
from .sigmoids import load_kernel, moment

__all__ = [
    "ExperimentConfig",
    "LAMBDA_SCAN",
    "SweepReport",
    "emit_report",
    "ordered_parallel_map",
    "report_from_json",
    "run_eval",
    "run_modular_convergence",
    "run_modular_inequality",
    "run_rate_suite",
    "run_uniform_convergence",
    "run_validate_kernel",
]

# Geometric scan used when the scaling parameter is existential: report the
# largest member that achieves the convergence criterion.
LAMBDA_SCAN = tuple(2.0**k for k in range(-8, 5))

SWEEP_HEADER = [
    "kernel", "phi", "function", "n", "lambda",
    "sup_error", "modular_error", "denom_min", "bound_lhs", "bound_rhs", "pass",
]
RATE_HEADER = [
    "kernel", "phi", "f", "n", "lambda0", "lambda1", "A1", "A2", "lhs", "rhs", "pass",
]
EVAL_HEADER = ["x", "K_n_f_x", "f_x", "abs_error"]


@dataclass(frozen=True)
class ExperimentConfig:
    kernel: str = "ramp"
    kernel_alpha: float | None = None
    phi: str = "power(p=2)"
    function: str = "f2"
    interval: tuple[float, float] = (0.0, 1.0)
    n_list: tuple[int, ...] = (8, 16, 32, 64, 128, 256)
    lambda_policy: str = "fixed"  # "fixed" | "scan"
    lambdas: tuple[float, ...] = (0.25, 1.0, 4.0)
    lambda0: float = 1.0
    grid: int = 4096
    seed: int = 0
    out_dir: str = "reports"
    formats: tuple[str, ...] = ("csv", "json")
    workers: int = 1
    tolerances: dict = field(
        default_factory=lambda: {
            "uniform_final": 0.02,
            "modular_final": 1e-2,
            "inequality_slack": 1e-6,
            "rate_slack": 1e-6,
        }
    )

    def __post_init__(self) -> None:
        object.__setattr__(self, "interval", tuple(float(v) for v in self.interval))
        object.__setattr__(self, "n_list", tuple(int(n) for n in self.n_list))
        object.__setattr__(self, "lambdas", tuple(float(v) for v in self.lambdas))
        object.__setattr__(self, "formats", tuple(self.formats))
        if not self.n_list:
            raise ValueError("n_list must be nonempty")
        if any(b <= a for a, b in zip(self.n_list, self.n_list[1:])):
            raise ValueError("n_list must be strictly ascending")
        a, b = self.interval
        for n in self.n_list:
            index_set(n, a, b)  # raises when the operator is undefined
        if self.grid < 64:
            raise ValueError("grid must be at least 64")
        if self.grid % 2:
            raise ValueError("grid must be even (Simpson panels)")
        if self.lambda_policy not in ("fixed", "scan"):
            raise ValueError("lambda_policy must be 'fixed' or 'scan'")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        return cls(**data)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def override(self, **kwargs) -> "ExperimentConfig":
        kwargs = {k: v for k, v in kwargs.items() if v is not None}
        return replace(self, **kwargs)

    def canonical(self) -> dict:
        return json.loads(json.dumps(asdict(self), sort_keys=True))

    @property
    def config_hash(self) -> str:
        payload = json.dumps(self.canonical(), sort_keys=True).encode()
        return hashlib.sha256(payload).hexdigest()[:16]

    def active_lambdas(self) -> tuple[float, ...]:
        return LAMBDA_SCAN if self.lambda_policy == "scan" else self.lambdas


@dataclass
class SweepReport:
    kind: str
    config: dict
    records: list[dict]
    summary: dict
    metadata: dict


def ordered_parallel_map(fn, items, workers: int = 1) -> list:
    """Map with results in input order; workers > 1 runs cells concurrently."""
    items = list(items)
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _metadata(config: ExperimentConfig, warnings_: list[str] | None = None) -> dict:
    return {
        "config_hash": config.config_hash,
        "version": __version__,
        "seed": config.seed,
        "warnings": warnings_ or [],
    }


def _resolve(config: ExperimentConfig) -> tuple:
    kernel = load_kernel(config.kernel, config.kernel_alpha)
    funcs = corpus()
    try:
        f = funcs[config.function]
    except KeyError:
        raise KeyError(
            f"unknown function {config.function!r}; corpus has {sorted(funcs)}"
        ) from None
    if f.domain != config.interval:
        raise ValueError(
            f"config interval {config.interval} does not match the domain "
            f"{f.domain} of {config.function}"
        )
    return kernel, f


def _grid_nodes(config: ExperimentConfig) -> np.ndarray:
    a, b = config.interval
    return np.linspace(a, b, config.grid + 1)


def _kernel_warnings(kernel) -> list[str]:
    notes = []
    if not kernel.assumptions.sigma2:
        notes.append(
            f"kernel {kernel.name!r} failed the unimodality check; its "
            "denominator bound is empirical (see denom_min per n)"
        )
    return notes


# ----------------------------------------------------------------------
# Run verbs
# ----------------------------------------------------------------------


def run_validate_kernel(config: ExperimentConfig) -> SweepReport:
    """Kernel facts: cached values, L1 norm, assumption flags, low moments."""
    kernel = load_kernel(config.kernel, config.kernel_alpha)
    rep = kernel.assumptions
    records = [
        {"key": "name", "value": kernel.name},
        {"key": "alpha", "value": kernel.alpha},
        {"key": "value_at_zero", "value": kernel.value_at_zero},
        {"key": "value_at_two", "value": kernel.value_at_two},
        {"key": "l1_norm", "value": kernel.l1_norm},
        {"key": "admissible", "value": kernel.admissible},
        {"key": "sigma1", "value": rep.sigma1},
        {"key": "sigma2", "value": rep.sigma2},
        {"key": "sigma3", "value": rep.sigma3},
        {"key": "decay_constant", "value": rep.decay_constant},
    ]
    for beta in (0.0, 0.5, 1.0):
        if beta <= kernel.alpha:
            records.append(
                {"key": f"moment_beta_{beta:g}", "value": moment(kernel, beta).value}
            )
    summary = {"passed": rep.all_pass, "admissible": kernel.admissible}
    return SweepReport(
        "kernel", config.canonical(), records, summary, _metadata(config, _kernel_warnings(kernel))
    )


def run_eval(config: ExperimentConfig) -> SweepReport:
    """Pointwise operator evaluation on the grid at the first configured n."""
    kernel, f = _resolve(config)
    n = config.n_list[0]
    xs = _grid_nodes(config)
    if f.nonneg:
        rows = eval_rows(make_operator(kernel, f, n), xs)
    else:
        kvals = evaluate_shifted_grid(kernel, f, n, xs)
        fx = np.asarray(f.evaluator(xs))
        rows = [
            (float(x), float(k), float(v), float(abs(k - v)))
            for x, k, v in zip(xs, kvals, fx)
        ]
    records = [
        {"x": x, "K_n_f_x": k, "f_x": v, "abs_error": e} for x, k, v, e in rows
    ]
    summary = {"n": n, "sup_error": max(r["abs_error"] for r in records)}
    return SweepReport(
        "eval", config.canonical(), records, summary, _metadata(config, _kernel_warnings(kernel))
    )


def run_uniform_convergence(config: ExperimentConfig) -> SweepReport:
    """Sup-norm error sweep over n for a continuous corpus function.

    Records the proof-level envelope 3 sup|f'| / (4 w(2) n) whenever the
    function is C1 and the kernel passed the structural checks.
    """
    kernel, f = _resolve(config)
    if not f.continuous:
        raise ValueError(f"{config.function} is not continuous; uniform sweep undefined")
    a, b = config.interval
    xs = _grid_nodes(config)
    fx = np.asarray(f.evaluator(xs))
    envelope_valid = (
        f.deriv_sup is not None and f.nonneg and kernel.assumptions.all_pass
    )

    def cell(n: int) -> dict:
        kvals = evaluate_shifted_grid(kernel, f, n, xs)
        sup_error = float(np.abs(kvals - fx).max())
        dp = denominator_profile(kernel, n, a, b)
        rec = {
            "kernel": kernel.name,
            "phi": None,
            "function": config.function,
            "n": n,
            "lambda": None,
            "sup_error": sup_error,
            "modular_error": None,
            "denom_min": dp.minimum,
            "bound_lhs": sup_error,
            "bound_rhs": None,
            "pass": None,
        }
        if envelope_valid:
            rec["bound_rhs"] = 3.0 * f.deriv_sup / (4.0 * kernel.value_at_two * n)
            rec["pass"] = sup_error <= rec["bound_rhs"] + 1e-6
        return rec

    records = ordered_parallel_map(cell, config.n_list, config.workers)
    errors = [r["sup_error"] for r in records]
    tol = config.tolerances["uniform_final"]
    summary = {
        "first_error": errors[0],
        "final_error": errors[-1],
        "monotone_decreasing": all(b < a for a, b in zip(errors, errors[1:])),
        "final_below_threshold": errors[-1] <= tol,
        "passed": errors[-1] < errors[0] and errors[-1] <= tol,
    }
    return SweepReport(
        "uniform", config.canonical(), records, summary, _metadata(config, _kernel_warnings(kernel))
    )


def run_modular_convergence(config: ExperimentConfig) -> SweepReport:
    """Modular error sweep over n and the scaling grid.

    Continuous functions must converge under every scaling in the grid;
    discontinuous ones only need some scaling to work, and the largest
    passing one is reported.
    """
    kernel, f = _resolve(config)
    phi = parse_phi_spec(config.phi)
    a, b = config.interval
    xs = _grid_nodes(config)
    lambdas = config.active_lambdas()
    tol = config.tolerances["modular_final"]

    def cell(n: int) -> list[dict]:
        kvals = evaluate_shifted_grid(kernel, f, n, xs)
        gf = GridFunction(xs, kvals)
        dp = denominator_profile(kernel, n, a, b)
        sup_error = float(np.abs(kvals - np.asarray(f.evaluator(xs))).max())
        out = []
        for lam in lambdas:
            mv = modular_distance(phi, f, gf, lam)
            out.append(
                {
                    "kernel": kernel.name,
                    "phi": phi.name,
                    "function": config.function,
                    "n": n,
                    "lambda": lam,
                    "sup_error": sup_error,
                    "modular_error": mv.value,
                    "denom_min": dp.minimum,
                    "bound_lhs": None,
                    "bound_rhs": None,
                    "pass": None,
                }
            )
        return out

    records = [
        rec for group in ordered_parallel_map(cell, config.n_list, config.workers)
        for rec in group
    ]
    final_n = config.n_list[-1]
    finals = {r["lambda"]: r["modular_error"] for r in records if r["n"] == final_n}
    firsts = {r["lambda"]: r["modular_error"] for r in records if r["n"] == config.n_list[0]}
    if f.continuous:
        passed = all(
            np.isfinite(finals[lam]) and finals[lam] <= tol and finals[lam] < max(firsts[lam], tol)
            for lam in lambdas
        )
        summary = {"passed": passed, "final_errors": {f"{k:g}": v for k, v in finals.items()}}
    else:
        passing = [lam for lam in lambdas if np.isfinite(finals[lam]) and finals[lam] <= tol]
        summary = {
            "passed": bool(passing),
            "lambda_found": max(passing) if passing else None,
            "final_errors": {f"{k:g}": v for k, v in finals.items()},
        }
    return SweepReport(
        "modular", config.canonical(), records, summary, _metadata(config, _kernel_warnings(kernel))
    )


def _nonneg_pairs(funcs: dict[str, TestFunction]) -> list[tuple[str, str]]:
    names = [k for k, v in sorted(funcs.items()) if v.nonneg]
    return [(p, q) for i, p in enumerate(names) for q in names[i + 1 :]]


def run_modular_inequality(
    config: ExperimentConfig, pairs: list[tuple[str, str]] | None = None
) -> SweepReport:
    """Check the operator-difference modular inequality on function pairs.

    For each pair and each n:  modular(lam (K_n f - K_n g))  must stay
    below  ||w||_1 * modular(lam / w(2) * (f - g))  up to the slack.
    """
    kernel, _ = _resolve(config)
    phi = parse_phi_spec(config.phi)
    funcs = corpus()
    pairs = pairs if pairs is not None else _nonneg_pairs(funcs)
    a, b = config.interval
    xs = _grid_nodes(config)
    lambdas = config.active_lambdas()
    slack = config.tolerances["inequality_slack"]

    records = []
    all_pass = True
    for name_f, name_g in pairs:
        f, g = funcs[name_f], funcs[name_g]
        if not (f.nonneg and g.nonneg):
            raise ValueError("inequality pairs must be non-negative")
        diff = abs_diff(f, g)
        rhs_per_lam = {
            lam: kernel.l1_norm
            * modular(phi, diff, lam / kernel.value_at_two).value
            for lam in lambdas
        }

        def cell(n: int, f=f, g=g, rhs_per_lam=rhs_per_lam, label=f"{name_f}|{name_g}"):
            kf = evaluate_grid(make_operator(kernel, f, n), xs)
            kg = evaluate_grid(make_operator(kernel, g, n), xs)
            dp = denominator_profile(kernel, n, a, b)
            gf = GridFunction(xs, kf - kg)
            out = []
            for lam in lambdas:
                lhs = modular_on_grid(phi, gf, lam).value
                rhs = rhs_per_lam[lam]
                ok = lhs <= rhs + slack + slack * abs(rhs)
                out.append(
                    {
                        "kernel": kernel.name,
                        "phi": phi.name,
                        "function": label,
                        "n": n,
                        "lambda": lam,
                        "sup_error": None,
                        "modular_error": None,
                        "denom_min": dp.minimum,
                        "bound_lhs": lhs,
                        "bound_rhs": rhs,
                        "pass": ok,
                    }
                )
            return out

        for group in ordered_parallel_map(cell, config.n_list, config.workers):
            records.extend(group)
    all_pass = all(r["pass"] for r in records)
    summary = {"passed": all_pass, "pairs": [f"{p}|{q}" for p, q in pairs]}
    return SweepReport(
        "inequality", config.canonical(), records, summary, _metadata(config, _kernel_warnings(kernel))
    )


def run_rate_suite(config: ExperimentConfig) -> SweepReport:
    """Rate-bound certificates across the whole corpus for the configured kernel.

    Sign-changing corpus members are lifted by their infimum before the
    bound is checked, mirroring the operator's sign-shift extension.
    """
    kernel, _ = _resolve(config)
    phi = parse_phi_spec(config.phi)
    funcs = corpus()
    lambda0 = config.lambda0
    lambda1 = choose_lambda1(kernel, lambda0)
    slack = config.tolerances["rate_slack"]

    targets = {}
    for name, f in sorted(funcs.items()):
        targets[name] = f if f.nonneg else shift(f, f.lower_bound)
    families = {name: build_smoother_family(t) for name, t in targets.items()}
    # The fidelity half of the K-objective is n-independent: one profile
    # per function serves the whole n sweep.
    profiles = {
        name: fidelity_profile(targets[name], phi, lambda0, families[name])
        for name in targets
    }

    cells = [(name, n) for name in sorted(targets) for n in config.n_list]

    def cell(key):
        name, n = key
        report = verify_rate_bound(
            targets[name], phi, kernel, n, lambda0, lambda1,
            families[name], grid=config.grid, tol=slack,
            fidelities=profiles[name],
        )
        return {
            "kernel": kernel.name,
            "phi": phi.name,
            "f": name,
            "n": n,
            "lambda0": lambda0,
            "lambda1": lambda1,
            "A1": report.a1,
            "A2": report.a2,
            "lhs": report.lhs,
            "rhs": report.rhs,
            "pass": report.passed,
        }

    records = ordered_parallel_map(cell, cells, config.workers)
    n_pass = sum(1 for r in records if r["pass"])
    summary = {
        "passed": n_pass == len(records),
        "pass_rate": n_pass / len(records),
        "cells": len(records),
    }
    return SweepReport(
        "rate", config.canonical(), records, summary, _metadata(config, _kernel_warnings(kernel))
    )


# ----------------------------------------------------------------------
# Emission
# ----------------------------------------------------------------------


def _svg_series(report: SweepReport) -> list[tuple[str, list[tuple[float, float]]]]:
    if report.kind == "uniform":
        pts = [(r["n"], r["sup_error"]) for r in report.records]
        return [("sup_error", pts)]
    if report.kind == "modular":
        lams = sorted({r["lambda"] for r in report.records})
        return [
            (
                f"lambda={lam:g}",
                [(r["n"], r["modular_error"]) for r in report.records if r["lambda"] == lam],
            )
            for lam in lams
        ]
    if report.kind == "inequality":
        labels = sorted({r["function"] for r in report.records})
        return [
            (
                label,
                [(r["n"], r["bound_lhs"]) for r in report.records if r["function"] == label],
            )
            for label in labels
        ]
    if report.kind == "rate":
        names = sorted({r["f"] for r in report.records})
        return [
            (f"lhs {name}", [(r["n"], r["lhs"]) for r in report.records if r["f"] == name])
            for name in names
        ]
    return []


def emit_report(report: SweepReport, formats=None, out_dir=None) -> list[Path]:
    """Write the report in each requested format; returns the paths.

    Output is deterministic byte-for-byte given an identical report:
    fixed float formatting, sorted JSON keys, newline-terminated files.
    """
    formats = tuple(formats) if formats is not None else tuple(report.config["formats"])
    out = Path(out_dir if out_dir is not None else report.config["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    base = f"{report.kind}_{report.metadata['config_hash']}"
    paths = []
    for fmt_name in formats:
        if fmt_name == "csv":
            if report.kind == "rate":
                header = RATE_HEADER
            elif report.kind == "eval":
                header = EVAL_HEADER
            elif report.kind == "kernel":
                header = ["key", "value"]
            else:
                header = SWEEP_HEADER
            paths.append(write_csv(out / f"{base}.csv", header, report.records))
        elif fmt_name == "json":
            payload = {
                "kind": report.kind,
                "config": report.config,
                "records": report.records,
                "summary": report.summary,
                "metadata": report.metadata,
            }
            paths.append(write_json(out / f"{base}.json", payload))
        elif fmt_name == "svg":
            series = _svg_series(report)
            if series:
                text = svg_loglog(series, title=f"{report.kind} {report.metadata['config_hash']}")
                path = out / f"{base}.svg"
                path.write_text(text + "\n", newline="\n")
                paths.append(path)
        else:
            raise ValueError(f"unknown format {fmt_name!r}")
    return paths


def report_from_json(path) -> SweepReport:
    data = json.loads(Path(path).read_text())
    return SweepReport(
        kind=data["kind"],
        config=data["config"],
        records=data["records"],
        summary=data["summary"],
        metadata=data["metadata"],
    )
