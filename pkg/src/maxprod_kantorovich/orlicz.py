"""Convex phi-functions, modular integrals, and the doubling check.

The modular of f is the integral of phi(|f|) over the domain.  Three
families are built in: powers u**p (the L^p scale), Zygmund-type
u**a * log**b(u + e), and exponentials exp(u**g) - 1.  The doubling
(Delta-2) condition phi(2u) <= M phi(u) is probed numerically on a
geometric grid; exponential phi-functions fail it, which is exactly why
their modular convergence depends on the scaling parameter.

Saturated modulars (integrand beyond 1e300) are a reported state, not an
error: they are expected behaviour for exponential phi at large scalings.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .functions import TestFunction, abs_diff
from .quadrature import MODULAR_TOLERANCE, IntegrationRequest, integrate

__all__ = [
    "Delta2Report",
    "GridFunction",
    "ModularValue",
    "PhiFunction",
    "build_phi",
    "delta2_check",
    "luxemburg_norm",
    "make_exponential",
    "make_power_phi",
    "make_zygmund",
    "modular",
    "modular_distance",
    "modular_on_grid",
    "parse_phi_spec",
]

SATURATION_LIMIT = 1e300


def _vec(fn):
    def call(u):
        arr = np.asarray(u, dtype=float)
        with np.errstate(over="ignore"):
            out = fn(arr)
        return float(out) if arr.ndim == 0 else np.asarray(out, dtype=float)

    return call


@dataclass(frozen=True)
class PhiFunction:
    """A phi-function: zero at zero, positive, non-decreasing, unbounded."""

    name: str
    evaluator: Callable[[np.ndarray], np.ndarray]
    convex: bool = True
    delta2: str = "unknown"  # "holds" | "fails" | "unknown"
    delta2_constant: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "evaluator", _vec(self.evaluator))
        if self.delta2 not in ("holds", "fails", "unknown"):
            raise ValueError(f"bad delta2 tag {self.delta2!r}")
        ev = self.evaluator
        if abs(ev(0.0)) > 1e-300:
            raise ValueError(f"{self.name}: phi(0) must be 0")
        us = np.logspace(-6, 1, 64)
        vals = np.asarray(ev(us))
        if np.any(vals <= 0):
            raise ValueError(f"{self.name}: phi must be positive for u > 0")
        if np.any(np.diff(vals) < -1e-15):
            raise ValueError(f"{self.name}: phi must be non-decreasing")
        # Overflow to inf counts as growth; cap so inf - inf never appears.
        probe = np.minimum(np.asarray(ev(np.array([1e2, 1e4, 1e6]))), 1e301)
        if not (np.all(np.diff(probe) >= 0) and probe[-1] >= 1e3 and probe[0] < probe[-1]):
            raise ValueError(f"{self.name}: phi does not grow unboundedly")
        if self.convex:
            rng = np.random.default_rng(0)
            u = rng.uniform(0.0, 30.0, 256)
            v = rng.uniform(0.0, 30.0, 256)
            mid = np.asarray(ev(0.5 * (u + v)))
            avg = 0.5 * (np.asarray(ev(u)) + np.asarray(ev(v)))
            if np.any(mid > avg + 1e-9 * (1.0 + np.abs(avg))):
                raise ValueError(f"{self.name}: midpoint convexity check failed")

    def __call__(self, u):
        return self.evaluator(u)


@dataclass(frozen=True)
class ModularValue:
    value: float
    lam: float
    error_estimate: float
    saturated: bool = False


@dataclass(frozen=True)
class GridFunction:
    """Uniform samples of a function, as produced by operator grid sweeps."""

    xs: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        xs = np.asarray(self.xs, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if xs.ndim != 1 or xs.shape != vals.shape or xs.size < 3:
            raise ValueError("need matching 1-d arrays with at least 3 samples")
        steps = np.diff(xs)
        if np.any(steps <= 0) or abs(steps.max() - steps.min()) > 1e-9 * steps.mean():
            raise ValueError("grid must be uniform and increasing")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "values", vals)


# ----------------------------------------------------------------------
# Families
# ----------------------------------------------------------------------


def make_power_phi(p: float) -> PhiFunction:
    """phi(u) = u**p for p >= 1; doubling constant exactly 2**p."""
    if p < 1:
        raise ValueError(f"power exponent must be >= 1, got {p}")
    return PhiFunction(
        name=f"power(p={p:g})",
        evaluator=lambda u: u**p,
        convex=True,
        delta2="holds",
        delta2_constant=2.0**p,
    )


def make_zygmund(alpha_z: float = 1.0, beta_z: float = 1.0) -> PhiFunction:
    """phi(u) = u**a * log**b(u + e); doubling holds."""
    if alpha_z < 1:
        raise ValueError(f"alpha must be >= 1, got {alpha_z}")
    if beta_z <= 0:
        raise ValueError(f"beta must be > 0, got {beta_z}")

    def ev(u):
        return u**alpha_z * np.log(u + np.e) ** beta_z

    # The doubling ratio 2**a * (log(2u+e)/log(u+e))**b peaks at moderate u.
    us = np.logspace(-6, 6, 481)
    ratio = 2.0**alpha_z * (np.log(2 * us + np.e) / np.log(us + np.e)) ** beta_z
    return PhiFunction(
        name=f"zygmund(alpha={alpha_z:g},beta={beta_z:g})",
        evaluator=ev,
        convex=True,
        delta2="holds",
        delta2_constant=float(ratio.max()),
    )


def make_exponential(gamma: float = 1.0) -> PhiFunction:
    """phi(u) = exp(u**gamma) - 1; the doubling condition fails."""
    if gamma <= 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    return PhiFunction(
        name=f"exponential(gamma={gamma:g})",
        evaluator=lambda u: np.expm1(u**gamma),
        convex=gamma >= 1.0,
        delta2="fails",
        delta2_constant=None,
    )


_PHI_BUILDERS: dict[str, Callable[..., PhiFunction]] = {
    "power": lambda p=2.0: make_power_phi(p),
    "zygmund": lambda alpha=1.0, beta=1.0: make_zygmund(alpha, beta),
    "exponential": lambda gamma=1.0: make_exponential(gamma),
}


def build_phi(name: str, **params: float) -> PhiFunction:
    try:
        builder = _PHI_BUILDERS[name]
    except KeyError:
        raise KeyError(
            f"unknown phi family {name!r}; expected one of {sorted(_PHI_BUILDERS)}"
        ) from None
    return builder(**params)


def parse_phi_spec(text: str) -> PhiFunction:
    """Parse 'power(p=2)', 'power:p=2', or bare 'power' into a PhiFunction."""
    text = text.strip()
    name, params = text, ""
    if "(" in text and text.endswith(")"):
        name, params = text[: text.index("(")], text[text.index("(") + 1 : -1]
    elif ":" in text:
        name, params = text.split(":", 1)
    kwargs = {}
    for item in filter(None, (p.strip() for p in params.split(","))):
        key, _, value = item.partition("=")
        kwargs[key.strip()] = float(value)
    return build_phi(name.strip(), **kwargs)


# ----------------------------------------------------------------------
# Modulars
# ----------------------------------------------------------------------


def _simpson(xs: np.ndarray, ys: np.ndarray) -> tuple[float, float]:
    """Composite Simpson on a uniform grid with an even panel count.

    Returns (value, estimate); the estimate is the gap to the trapezoid
    rule, a cheap upper proxy for the quadrature error.
    """
    if xs.size % 2 == 0:
        raise ValueError("Simpson needs an odd sample count (even panels)")
    h = (xs[-1] - xs[0]) / (xs.size - 1)
    simp = (h / 3.0) * (
        ys[0] + ys[-1] + 4.0 * ys[1:-1:2].sum() + 2.0 * ys[2:-2:2].sum()
    )
    trap = h * (0.5 * ys[0] + ys[1:-1].sum() + 0.5 * ys[-1])
    return float(simp), float(abs(simp - trap))


def modular(phi: PhiFunction, f: TestFunction, lam: float) -> ModularValue:
    """Integral of phi(lam * |f|) over the domain of f.

    Piecewise-constant functions collapse to an exact finite sum; anything
    else goes through breakpoint-aware adaptive quadrature.  Overflow of
    phi is reported as a saturated (flagged-infinite) value.
    """
    if lam <= 0:
        raise ValueError("lam must be positive")
    ev = phi.evaluator
    if f.piece_values is not None:
        total = 0.0
        for lo, hi, v in f.piece_values:
            term = float(ev(lam * abs(v)))
            if not np.isfinite(term) or term > SATURATION_LIMIT:
                return ModularValue(np.inf, lam, np.inf, saturated=True)
            total += term * (hi - lo)
        return ModularValue(total, lam, 0.0, False)

    fe = f.evaluator

    def integrand(x):
        return ev(lam * np.abs(fe(x)))

    a, b = f.domain
    probe_xs = np.linspace(a, b, 257)
    probe = np.asarray(integrand(probe_xs))
    if not np.all(np.isfinite(probe)) or probe.max() > SATURATION_LIMIT:
        return ModularValue(np.inf, lam, np.inf, saturated=True)
    result = integrate(
        IntegrationRequest(
            integrand, a, b, breakpoints=f.breakpoints, abs_tolerance=MODULAR_TOLERANCE
        )
    )
    if not np.isfinite(result.value) or result.value > SATURATION_LIMIT:
        return ModularValue(np.inf, lam, np.inf, saturated=True)
    return ModularValue(result.value, lam, result.error_estimate, False)


def modular_on_grid(phi: PhiFunction, grid: GridFunction, lam: float) -> ModularValue:
    """Composite-Simpson modular of lam * |values| over a uniform grid."""
    if lam <= 0:
        raise ValueError("lam must be positive")
    ys = np.asarray(phi.evaluator(lam * np.abs(grid.values)))
    if not np.all(np.isfinite(ys)) or ys.max() > SATURATION_LIMIT:
        return ModularValue(np.inf, lam, np.inf, saturated=True)
    value, estimate = _simpson(grid.xs, ys)
    return ModularValue(value, lam, estimate, False)


def modular_distance(
    phi: PhiFunction,
    f: TestFunction,
    g: TestFunction | GridFunction,
    lam: float,
) -> ModularValue:
    """Modular of lam * |f - g|.

    Against another test function the difference inherits merged
    breakpoints (including detected sign crossings) and goes through
    adaptive quadrature; against grid samples the modular is a composite
    Simpson sum over the shared uniform grid.
    """
    if isinstance(g, TestFunction):
        return modular(phi, abs_diff(f, g), lam)
    diff = np.asarray(f.evaluator(g.xs)) - g.values
    return modular_on_grid(phi, GridFunction(g.xs, diff), lam)


# ----------------------------------------------------------------------
# Doubling condition and the Luxemburg norm
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class Delta2Report:
    status: str  # "holds" | "fails" | "unknown"
    constant: float | None
    witness: float | None


def delta2_check(phi: PhiFunction, u_grid=None) -> Delta2Report:
    """Estimate sup phi(2u) / phi(u) on a geometric grid.

    Verdicts: "holds" with constant 1.05 x measured sup when the ratio has
    plateaued (under 1% growth across the last decade); "fails" with a
    witness when the per-decade maxima grow monotonically; "unknown"
    otherwise.
    """
    us = np.asarray(u_grid, dtype=float) if u_grid is not None else np.logspace(-4, 2, 121)
    if us.size == 0 or np.any(us <= 0):
        raise ValueError("u grid must be nonempty and positive")
    ev = phi.evaluator
    with np.errstate(over="ignore", invalid="ignore"):
        ratio = np.asarray(ev(2.0 * us)) / np.asarray(ev(us))
    ratio = np.where(np.isfinite(ratio), ratio, np.inf)

    decades = np.floor(np.log10(us)).astype(int)
    decade_ids = sorted(set(decades.tolist()))
    decade_max = np.array([ratio[decades == d].max() for d in decade_ids])

    if len(decade_max) >= 2 and np.isfinite(decade_max[-1]):
        growth = decade_max[-1] / decade_max[-2]
        if growth < 1.01:
            return Delta2Report("holds", float(1.05 * ratio.max()), None)
    if np.all(decade_max[1:] > decade_max[:-1]):
        finite = np.where(np.isfinite(ratio), ratio, -np.inf)
        return Delta2Report("fails", None, float(us[int(np.argmax(finite))]))
    return Delta2Report("unknown", None, None)


def luxemburg_norm(phi: PhiFunction, f: TestFunction, tol: float = 1e-8) -> float:
    """Norm by bisection: the smallest s with modular of f/s at most 1.

    Diagnostic plumbing only; the convergence experiments use the modular
    directly.
    """
    if float(np.max(np.abs(f.sample()))) == 0.0:
        return 0.0

    def over(s: float) -> bool:
        return modular(phi, f, 1.0 / s).value > 1.0

    hi = 1.0
    for _ in range(200):
        if not over(hi):
            break
        hi *= 2.0
    else:
        raise ArithmeticError("luxemburg_norm: no finite bracket found")
    lo = hi
    for _ in range(200):
        candidate = lo / 2.0
        if over(candidate):
            break
        lo = candidate
    else:
        return 0.0
    lo = lo / 2.0
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if over(mid):
            lo = mid
        else:
            hi = mid
    return hi
