"""Sigmoidal activations and the density kernels they induce.

A sigmoidal function rises from 0 to 1; its density kernel is the scaled
two-sided difference ``0.5 * (sigma(x + 1) - sigma(x - 1))``.  The module
builds the four catalog sigmoids (logistic, tanh, ramp, step), validates
the structural assumptions (odd symmetry about 1/2, kernel unimodality,
power-law tail decay) numerically, and computes kernel moments and L1
norms with auditable truncation windows.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import expit

from .quadrature import QuadratureError, integrate_decaying

__all__ = [
    "AssumptionReport",
    "DensityKernel",
    "MomentReport",
    "SigmoidalFunction",
    "kernel_catalog",
    "load_kernel",
    "load_sigmoid_csv",
    "make_density_kernel",
    "make_logistic",
    "make_ramp",
    "make_step",
    "make_tabulated",
    "make_tanh",
    "moment",
    "validate_assumptions",
]

_DENOM_FLOOR = 1e-30
_MOMENT_TAIL_TOL = 1e-9
_MOMENT_WINDOW_CAP = 100_000


def _vectorized(fn):
    """Wrap a numpy-array evaluator so scalars come back as floats."""

    def call(x):
        arr = np.asarray(x, dtype=float)
        out = fn(arr)
        return float(out) if arr.ndim == 0 else out

    return call


@dataclass(frozen=True)
class SigmoidalFunction:
    """A non-decreasing activation rising from 0 to 1.

    ``alpha`` is the working tail-decay exponent: the tails are assumed to
    obey sigma(-x) = O(x**-alpha), and alpha sizes every truncation window
    downstream.  Fast-decay sigmoids satisfy the bound for any alpha, so
    the stored value is a choice, not a measurement.
    """

    name: str
    evaluator: Callable[[np.ndarray], np.ndarray]
    alpha: float
    breakpoints: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        object.__setattr__(
            self, "breakpoints", tuple(float(b) for b in self.breakpoints)
        )
        object.__setattr__(self, "evaluator", _vectorized(self.evaluator))
        self._check_monotone_sample()
        self._check_tails()

    def __call__(self, x):
        return self.evaluator(x)

    def _check_monotone_sample(self) -> None:
        xs = np.linspace(-12.0, 12.0, 4801)
        ys = self.evaluator(xs)
        if np.any(np.diff(ys) < -1e-12):
            i = int(np.argmin(np.diff(ys)))
            raise ValueError(
                f"{self.name}: not non-decreasing near x={xs[i]:.6g}"
            )

    def _check_tails(self) -> None:
        for t in (10.0, 100.0, 1000.0):
            tol = max(10.0 * t**-self.alpha, 1e-12)
            lo = float(self.evaluator(-t))
            hi = float(self.evaluator(t))
            if lo > tol or hi < 1.0 - tol:
                raise ValueError(
                    f"{self.name}: tails violate the 0/1 limits at T={t:g} "
                    f"(sigma(-T)={lo:.3g}, sigma(T)={hi:.3g}, tol={tol:.3g})"
                )


@dataclass(frozen=True)
class AssumptionReport:
    """Numeric verdicts for the three structural assumptions.

    sigma1: sigma - 1/2 is odd; sigma2: the kernel is non-decreasing left
    of 0 and non-increasing right of 0; sigma3: sigma(-x) * x**alpha stays
    bounded.  Witness points locate the worst violation for any failure.
    """

    sigma1: bool
    sigma2: bool
    sigma3: bool
    decay_constant: float
    witnesses: dict = field(default_factory=dict)

    @property
    def all_pass(self) -> bool:
        return self.sigma1 and self.sigma2 and self.sigma3


@dataclass(frozen=True)
class DensityKernel:
    """The induced density 0.5 * (sigma(x+1) - sigma(x-1)), with cached facts."""

    source: SigmoidalFunction
    evaluator: Callable[[np.ndarray], np.ndarray]
    value_at_zero: float
    value_at_two: float
    l1_norm: float
    breakpoints: tuple[float, ...]
    decay_constant: float
    assumptions: AssumptionReport

    @property
    def name(self) -> str:
        return self.source.name

    @property
    def alpha(self) -> float:
        return self.source.alpha

    @property
    def admissible(self) -> bool:
        """Usable in the operator denominator: strictly positive at 2."""
        return self.value_at_two > 0.0

    def __call__(self, x):
        return self.evaluator(x)


@dataclass(frozen=True)
class MomentReport:
    beta: float
    value: float
    sup_grid_resolution: float
    window: int


# ----------------------------------------------------------------------
# Catalog sigmoids
# ----------------------------------------------------------------------


def make_logistic(alpha: float = 2.0) -> SigmoidalFunction:
    """Logistic activation 1 / (1 + exp(-x)); decays faster than any power."""
    return SigmoidalFunction("logistic", expit, alpha)


def make_tanh(alpha: float = 2.0) -> SigmoidalFunction:
    """Hyperbolic-tangent activation (tanh(x) + 1) / 2."""

    def ev(x):
        return 0.5 * (np.tanh(x) + 1.0)

    return SigmoidalFunction("tanh", ev, alpha)


def make_ramp(alpha: float = 4.0) -> SigmoidalFunction:
    """Piecewise-linear ramp: 0 below -3/2, x/3 + 1/2 in between, 1 above 3/2."""

    def ev(x):
        return np.clip(x / 3.0 + 0.5, 0.0, 1.0)

    return SigmoidalFunction("ramp", ev, alpha, breakpoints=(-1.5, 1.5))


def make_step(alpha: float = 4.0) -> SigmoidalFunction:
    """Discontinuous step: 0 below -2, 1/2 on [-2, 2], 1 above 2."""

    def ev(x):
        return np.where(x < -2.0, 0.0, np.where(x > 2.0, 1.0, 0.5))

    return SigmoidalFunction("step", ev, alpha, breakpoints=(-2.0, 2.0))


def make_tabulated(
    xs, ys, name: str = "tabulated", alpha: float = 2.0
) -> SigmoidalFunction:
    """Sigmoid from (x, sigma(x)) samples with monotone linear interpolation.

    Outside the tabulated range the values saturate at the first/last
    sample, so the table must reach 0 on the left and 1 on the right.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.ndim != 1 or xs.shape != ys.shape or xs.size < 2:
        raise ValueError("need two equal-length 1-d sample arrays")
    if np.any(np.diff(xs) <= 0):
        raise ValueError("sample abscissae must be strictly increasing")
    if np.any(np.diff(ys) < 0):
        raise ValueError("sample values must be non-decreasing")

    def ev(x):
        return np.interp(x, xs, ys)

    return SigmoidalFunction(name, ev, alpha, breakpoints=tuple(xs))


def load_sigmoid_csv(path, alpha: float = 2.0, name: str | None = None) -> SigmoidalFunction:
    """Read a two-column (x, sigma(x)) CSV into a tabulated sigmoid."""
    xs: list[float] = []
    ys: list[float] = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().startswith("#"):
                continue
            try:
                x, y = float(row[0]), float(row[1])
            except ValueError:
                continue  # header line
            xs.append(x)
            ys.append(y)
    label = name or str(path)
    return make_tabulated(xs, ys, name=label, alpha=alpha)


def kernel_catalog() -> dict[str, Callable[[], SigmoidalFunction]]:
    return {
        "logistic": make_logistic,
        "tanh": make_tanh,
        "ramp": make_ramp,
        "step": make_step,
    }


def load_kernel(name: str, alpha: float | None = None) -> DensityKernel:
    """Resolve a catalog name or a CSV path to a ready density kernel."""
    catalog = kernel_catalog()
    if name in catalog:
        sigma = catalog[name]() if alpha is None else catalog[name](alpha)
    elif str(name).endswith(".csv"):
        sigma = load_sigmoid_csv(name, alpha=alpha or 2.0)
    else:
        raise KeyError(
            f"unknown kernel {name!r}; expected one of {sorted(catalog)} or a CSV path"
        )
    return make_density_kernel(sigma)


# ----------------------------------------------------------------------
# Assumption validation
# ----------------------------------------------------------------------


def _kernel_eval(sigma: SigmoidalFunction):
    ev = sigma.evaluator

    def kern(x):
        arr = np.asarray(x, dtype=float)
        out = 0.5 * (ev(arr + 1.0) - ev(arr - 1.0))
        return float(out) if np.ndim(x) == 0 else out

    return kern


def validate_assumptions(
    sigma: SigmoidalFunction, grid_resolution: float = 1e-3
) -> AssumptionReport:
    """Check odd symmetry, kernel unimodality, and tail decay on grids.

    Failures are reported with witness points, never raised: the step
    sigmoid is a deliberate catalog member whose kernel is not unimodal.
    """
    if grid_resolution <= 0:
        raise ValueError("grid_resolution must be positive")
    witnesses: dict = {}

    xs = np.arange(0.0, 10.0 + grid_resolution, grid_resolution)
    asym = np.abs(sigma.evaluator(xs) + sigma.evaluator(-xs) - 1.0)
    sigma1 = bool(asym.max() <= 1e-9)
    if not sigma1:
        witnesses["sigma1"] = float(xs[int(np.argmax(asym))])

    kern = _kernel_eval(sigma)
    ts = np.arange(0.0, 10.0 + grid_resolution, grid_resolution)
    right = np.asarray(kern(ts))
    left = np.asarray(kern(-ts))
    sigma2 = True
    for half, label in ((right, "right"), (left, "left")):
        running_min = np.minimum.accumulate(half)
        exceed = half - running_min
        worst = int(np.argmax(exceed))
        if exceed[worst] > 1e-12:
            sigma2 = False
            at_min = int(np.argmin(half[: worst + 1]))
            t_lo, t_hi = ts[at_min], ts[worst]
            if label == "left":
                t_lo, t_hi = -t_lo, -t_hi
            witnesses.setdefault("sigma2", (float(t_lo), float(t_hi)))

    grid = np.logspace(0.0, 6.0, 241)
    tailvals = np.asarray(sigma.evaluator(-grid)) * grid**sigma.alpha
    c = float(tailvals.max())
    decades = np.clip(np.floor(np.log10(grid)).astype(int), 0, 5)
    decade_max = [tailvals[decades == d].max() for d in range(6)]
    growing = all(b > a for a, b in zip(decade_max, decade_max[1:]))
    sigma3 = not (growing and decade_max[-1] >= c * 0.999)
    if not sigma3:
        witnesses["sigma3"] = float(grid[int(np.argmax(tailvals))])

    return AssumptionReport(sigma1, sigma2, sigma3, c, witnesses)


# ----------------------------------------------------------------------
# Density kernel
# ----------------------------------------------------------------------


def make_density_kernel(sigma: SigmoidalFunction) -> DensityKernel:
    """Build the density kernel and cache its values at 0 and 2 and its L1 norm.

    Requires alpha > 1 so the L1 quadrature window has an integrable tail
    majorant.  The sampled-monotonicity check of the sigmoid is repeated
    here; a failing evaluator is rejected.
    """
    if sigma.alpha <= 1.0:
        raise QuadratureError(
            "kernel L1 norm needs alpha > 1 for the quadrature tail bound"
        )
    probe = np.linspace(-12.0, 12.0, 2401)
    if np.any(np.diff(sigma.evaluator(probe)) < -1e-12):
        raise ValueError(f"{sigma.name}: sampled monotonicity check failed")

    kern = _kernel_eval(sigma)
    report = validate_assumptions(sigma)
    decay = _probe_decay(kern, sigma.alpha)
    l1 = integrate_decaying(kern, sigma.alpha, 1e-9)
    bps = sorted({b + s for b in sigma.breakpoints for s in (-1.0, 1.0)})
    return DensityKernel(
        source=sigma,
        evaluator=kern,
        value_at_zero=float(kern(0.0)),
        value_at_two=float(kern(2.0)),
        l1_norm=l1.value,
        breakpoints=tuple(bps),
        decay_constant=decay,
        assumptions=report,
    )


# ----------------------------------------------------------------------
# Generalized absolute moments
# ----------------------------------------------------------------------


def _probe_decay(kern, exponent: float) -> float:
    """Max of |kern(+-x)| * x**exponent over the geometric probe grid."""
    grid = np.logspace(0.0, 6.0, 241)
    vals = np.maximum(np.abs(np.asarray(kern(grid))), np.abs(np.asarray(kern(-grid))))
    return float((vals * grid**exponent).max())


def _moment_inner(kernel: DensityKernel, beta: float, xs: np.ndarray, window: int):
    """max over |k| <= window of kernel(x - k) * |x - k|**beta, per x."""
    ks = np.arange(-window, window + 1, dtype=float)
    t = xs[:, None] - ks[None, :]
    vals = np.asarray(kernel.evaluator(t)) * np.abs(t) ** beta
    return vals.max(axis=1)


def moment(
    kernel: DensityKernel, beta: float, grid_resolution: float = 1e-4
) -> MomentReport:
    """Generalized absolute moment of order beta.

    Sup over x in [0, 1] (integer shifts leave the inner max unchanged) of
    the max over integers k of kernel(x-k) * |x-k|**beta.  The k-window is
    truncated where the power-law tail majorant drops below the running
    max (exact for a max of non-negative terms) or below 1e-9 absolute;
    the grid search is sharpened by golden-section refinement at the best
    cell.  Orders beta > alpha are rejected: the sup may be infinite.
    """
    if beta < 0:
        raise ValueError("beta must be non-negative")
    if beta > kernel.alpha:
        raise ValueError(
            f"moment of order beta={beta} may be unbounded: exceeds alpha={kernel.alpha}"
        )
    if grid_resolution <= 0:
        raise ValueError("grid_resolution must be positive")

    xs = np.arange(0.0, 1.0 + grid_resolution, grid_resolution)
    window = 8
    best = float(_moment_inner(kernel, beta, xs, window).max())
    # When beta is at or near alpha the alpha-exponent majorant loses its
    # decay, so probe one power higher; the catalog kernels decay faster
    # than any power, making the re-measured constant finite.
    gap = max(kernel.alpha - beta, 1.0)
    c = _probe_decay(kernel.evaluator, beta + gap)
    while True:
        # Tail terms beyond the window are majorized by C * w**(-gap); once
        # that falls under the running max, truncation is exact for a max
        # of non-negative terms.
        majorant = c * float(window) ** (-gap) if c > 0 else 0.0
        if majorant < max(best, _MOMENT_TAIL_TOL):
            break
        window *= 2
        if window > _MOMENT_WINDOW_CAP:
            raise ValueError("moment window exceeded cap; decay too slow")
        best = float(_moment_inner(kernel, beta, xs, window).max())

    inner = _moment_inner(kernel, beta, xs, window)
    i_best = int(np.argmax(inner))

    def h(x: float) -> float:
        return float(_moment_inner(kernel, beta, np.array([x]), window)[0])

    lo = max(0.0, xs[i_best] - grid_resolution)
    hi = min(1.0, xs[i_best] + grid_resolution)
    value = max(float(inner[i_best]), _golden_max(h, lo, hi))
    return MomentReport(beta, value, grid_resolution, window)


def _golden_max(h, lo: float, hi: float, iters: int = 60) -> float:
    """Golden-section maximization of a locally unimodal scalar function."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = h(c), h(d)
    for _ in range(iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = h(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = h(d)
    return max(fc, fd)
