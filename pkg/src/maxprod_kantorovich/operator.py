"""The max-product Kantorovich sampling operator.

For a density kernel w, sample count n, and cell means M_k (the averages
of f over the dyadic-free cells [k/n, (k+1)/n]), the operator value at x
is the ratio of two maxima over the admissible index range:

    max_k M_k * w(n*x - k)   /   max_k w(n*x - k).

The reference evaluation path scans the full index range; an optional
pruned path restricts to a decay-sized window and must agree with the
reference to working precision.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .functions import TestFunction, shift
from .sigmoids import DensityKernel

__all__ = [
    "DegenerateDenominatorError",
    "DenominatorProfile",
    "KantorovichMeans",
    "OperatorInstance",
    "OperatorUndefinedError",
    "denominator_profile",
    "evaluate",
    "evaluate_grid",
    "evaluate_shifted",
    "evaluate_shifted_grid",
    "index_set",
    "kantorovich_means",
    "make_operator",
]

DENOMINATOR_FLOOR = 1e-30


class OperatorUndefinedError(ValueError):
    """The index range ceil(n*a) .. floor(n*b)-1 is empty."""


class DegenerateDenominatorError(ArithmeticError):
    """The kernel max over the index range fell below the positivity floor."""


def index_set(n: int, a: float, b: float) -> range:
    """Inclusive integer range ceil(n*a) .. floor(n*b) - 1.

    Every member k keeps the whole cell [k/n, (k+1)/n] inside [a, b].
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    lo = math.ceil(n * a)
    hi = math.floor(n * b) - 1
    if lo > hi:
        raise OperatorUndefinedError(
            f"empty index range for n={n} on [{a}, {b}]: ceil(na)={lo} > floor(nb)-1={hi}"
        )
    return range(lo, hi + 1)


@dataclass(frozen=True)
class KantorovichMeans:
    """Cell averages n * integral of f over [k/n, (k+1)/n], k in the index range."""

    n: int
    k_range: range
    values: np.ndarray


def kantorovich_means(f: TestFunction, n: int, tol: float = 1e-10) -> KantorovichMeans:
    """One mean per index; exact via the antiderivative when available."""
    a, b = f.domain
    ks = index_set(n, a, b)
    values = np.empty(len(ks))
    for i, k in enumerate(ks):
        lo, hi = k / n, (k + 1) / n
        try:
            values[i] = n * f.cell_integral(lo, hi, tol=tol)
        except ArithmeticError as exc:
            raise ArithmeticError(f"cell k={k}: {exc}") from exc
    return KantorovichMeans(n, ks, values)


@dataclass(frozen=True)
class OperatorInstance:
    kernel: DensityKernel
    f: TestFunction
    n: int
    means: KantorovichMeans


def make_operator(
    kernel: DensityKernel,
    f: TestFunction,
    n: int,
    allow_inadmissible: bool = False,
) -> OperatorInstance:
    """Bind kernel, function, and scale; precomputes the cell means.

    Kernels with vanishing value at 2 lack the denominator lower bound and
    are rejected unless explicitly overridden.  Kernels that failed the
    unimodality check are allowed with a warning: their denominator bound
    is empirical, certified per (n, interval) by ``denominator_profile``.
    """
    index_set(n, *f.domain)
    if kernel.value_at_two <= 0.0 and not allow_inadmissible:
        raise ValueError(
            f"kernel {kernel.name!r} has value_at_two={kernel.value_at_two}; "
            "no positive denominator bound (pass allow_inadmissible to override)"
        )
    if not kernel.assumptions.sigma2:
        warnings.warn(
            f"kernel {kernel.name!r} is not unimodal; the denominator lower "
            "bound is empirical, check it with denominator_profile",
            stacklevel=2,
        )
    return OperatorInstance(kernel, f, n, kantorovich_means(f, n))


def _weights(instance: OperatorInstance, xs: np.ndarray) -> np.ndarray:
    ks = np.asarray(instance.means.k_range, dtype=float)
    t = instance.n * xs[:, None] - ks[None, :]
    return np.asarray(instance.kernel.evaluator(t))


def evaluate_grid(
    instance: OperatorInstance, xs, pruned: bool = False
) -> np.ndarray:
    """Operator values on an array of points in [a, b]."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    a, b = instance.f.domain
    if xs.min() < a - 1e-12 or xs.max() > b + 1e-12:
        raise ValueError("evaluation points must lie inside the domain")
    if pruned:
        return _evaluate_pruned(instance, xs)
    w = _weights(instance, xs)
    den = w.max(axis=1)
    if den.min() <= DENOMINATOR_FLOOR:
        bad = float(xs[int(np.argmin(den))])
        raise DegenerateDenominatorError(
            f"denominator {den.min():.3g} at x={bad:.6g} (n={instance.n})"
        )
    num = (instance.means.values[None, :] * w).max(axis=1)
    return num / den


def evaluate(instance: OperatorInstance, x: float) -> float:
    """Operator value at a single point."""
    return float(evaluate_grid(instance, np.array([float(x)]))[0])


def _prune_window(kernel: DensityKernel) -> int:
    threshold = 1e-16 * max(kernel.value_at_zero, kernel.value_at_two) * 0.5
    d = 4
    while d < 1 << 20:
        tail = max(float(kernel.evaluator(float(d))), float(kernel.evaluator(float(-d))))
        if tail < threshold:
            return d
        d *= 2
    return d


def _evaluate_pruned(instance: OperatorInstance, xs: np.ndarray) -> np.ndarray:
    """Windowed scan: skip indices whose kernel weight is negligible."""
    ks = instance.means.k_range
    window = _prune_window(instance.kernel)
    n = instance.n
    base = np.rint(n * xs).astype(int)
    offsets = np.arange(-window, window + 1)
    k_mat = base[:, None] + offsets[None, :]
    valid = (k_mat >= ks.start) & (k_mat < ks.stop)
    k_idx = np.clip(k_mat - ks.start, 0, len(ks) - 1)
    t = n * xs[:, None] - k_mat
    w = np.where(valid, np.asarray(instance.kernel.evaluator(t.astype(float))), 0.0)
    den = w.max(axis=1)
    if den.min() <= DENOMINATOR_FLOOR:
        bad = float(xs[int(np.argmin(den))])
        raise DegenerateDenominatorError(
            f"denominator {den.min():.3g} at x={bad:.6g} (n={n}, pruned)"
        )
    num = np.where(valid, instance.means.values[k_idx] * w, -np.inf).max(axis=1)
    return num / den


def evaluate_shifted_grid(
    kernel: DensityKernel, f: TestFunction, n: int, xs
) -> np.ndarray:
    """Sign-shift extension: apply the operator to f - c and add c back.

    With c = inf f the shifted function is non-negative, so the whole
    non-negative theory applies; for non-negative f the shift is zero and
    this reduces to the plain operator.
    """
    if f.nonneg:
        return evaluate_grid(make_operator(kernel, f, n), xs)
    c = f.lower_bound
    lifted = shift(f, c)
    return evaluate_grid(make_operator(kernel, lifted, n), xs) + c


def evaluate_shifted(kernel: DensityKernel, f: TestFunction, n: int, x: float) -> float:
    return float(evaluate_shifted_grid(kernel, f, n, np.array([float(x)]))[0])


@dataclass(frozen=True)
class DenominatorProfile:
    n: int
    minimum: float
    argmin: float
    grid: int


def denominator_profile(
    kernel: DensityKernel, n: int, a: float, b: float, grid: int = 10_000
) -> DenominatorProfile:
    """Grid minimum of max_k w(n*x - k): the empirical denominator bound.

    Certifies, per (kernel, n, interval), the lower bound that the theory
    promises only for sufficiently large n.
    """
    if grid < 2:
        raise ValueError("grid must have at least 2 points")
    ks = np.asarray(index_set(n, a, b), dtype=float)
    xs = np.linspace(a, b, grid)
    w = np.asarray(kernel.evaluator(n * xs[:, None] - ks[None, :]))
    den = w.max(axis=1)
    i = int(np.argmin(den))
    return DenominatorProfile(n, float(den[i]), float(xs[i]), grid)


def eval_rows(instance: OperatorInstance, xs) -> list[tuple[float, float, float, float]]:
    """(x, K_n f(x), f(x), |error|) rows for CSV export."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    kx = evaluate_grid(instance, xs)
    fx = np.asarray(instance.f.evaluator(xs))
    return [
        (float(x), float(k), float(f), float(abs(k - f)))
        for x, k, f in zip(xs, kx, fx)
    ]
