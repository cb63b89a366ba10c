"""Test functions on a bounded interval, with exact antiderivatives.

The corpus spans the hypotheses of every convergence statement checked by
the harness: a C1 Lipschitz function, a smooth concave bump, a continuous
kink, a jump indicator, and a sign-changing line.  Combinators build sums,
scalings, shifts, and absolute differences while propagating exact
antiderivatives whenever the algebra allows it.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .quadrature import IntegrationRequest, clip_breakpoints, integrate

__all__ = [
    "TestFunction",
    "abs_diff",
    "add",
    "corpus",
    "scale",
    "shift",
]


def _vec(fn):
    def call(x):
        arr = np.asarray(x, dtype=float)
        out = fn(arr)
        return float(out) if arr.ndim == 0 else np.asarray(out, dtype=float)

    return call


@dataclass(frozen=True)
class TestFunction:
    """A bounded function on [a, b] together with whatever exactness it affords.

    ``antiderivative`` (when present) makes Kantorovich cell means exact;
    ``piece_values`` marks piecewise-constant functions, letting modular
    integrals collapse to finite sums; ``lower_bound`` is the shift
    constant used to lift sign-changing functions into the non-negative
    theory; ``deriv_sup`` is the sup of |f'| for C1 members (None
    otherwise).
    """

    name: str
    evaluator: Callable[[np.ndarray], np.ndarray]
    domain: tuple[float, float]
    breakpoints: tuple[float, ...] = ()
    antiderivative: Callable[[np.ndarray], np.ndarray] | None = None
    lower_bound: float = 0.0
    nonneg: bool = True
    continuous: bool = True
    deriv_sup: float | None = None
    piece_values: tuple[tuple[float, float, float], ...] | None = None

    def __post_init__(self) -> None:
        a, b = self.domain
        if not a < b:
            raise ValueError(f"domain must satisfy a < b, got {self.domain}")
        object.__setattr__(self, "domain", (float(a), float(b)))
        object.__setattr__(
            self, "breakpoints", clip_breakpoints(self.breakpoints, a, b)
        )
        object.__setattr__(self, "evaluator", _vec(self.evaluator))
        if self.antiderivative is not None:
            object.__setattr__(self, "antiderivative", _vec(self.antiderivative))
        ys = self.sample(512)
        if not np.all(np.isfinite(ys)):
            raise ValueError(f"{self.name}: evaluator not finite on the domain")
        if self.nonneg and ys.min() < -1e-12:
            raise ValueError(f"{self.name}: flagged nonneg but dips to {ys.min():.3g}")
        if self.lower_bound > ys.min() + 1e-12:
            raise ValueError(
                f"{self.name}: lower_bound {self.lower_bound} exceeds sampled min"
            )

    def __call__(self, x):
        return self.evaluator(x)

    def sample(self, count: int = 512) -> np.ndarray:
        a, b = self.domain
        return np.asarray(self.evaluator(np.linspace(a, b, count)))

    def cell_integral(self, lo: float, hi: float, tol: float = 1e-10) -> float:
        """Exact-when-possible integral of f over [lo, hi]."""
        if self.antiderivative is not None:
            return float(self.antiderivative(hi) - self.antiderivative(lo))
        request = IntegrationRequest(
            self.evaluator,
            lo,
            hi,
            breakpoints=clip_breakpoints(self.breakpoints, lo, hi),
            abs_tolerance=tol,
        )
        result = integrate(request)
        if not result.converged:
            raise ArithmeticError(
                f"{self.name}: cell integral over [{lo}, {hi}] did not converge"
            )
        return result.value


def scale(f: TestFunction, factor: float) -> TestFunction:
    """factor * f, propagating the antiderivative exactly."""
    ev = f.evaluator
    anti = f.antiderivative
    pieces = None
    if f.piece_values is not None:
        pieces = tuple((lo, hi, factor * v) for lo, hi, v in f.piece_values)
    sampled_min = float(np.min(f.sample()))
    return replace(
        f,
        name=f"{factor:g}*{f.name}",
        evaluator=lambda x: factor * ev(x),
        antiderivative=(lambda x: factor * anti(x)) if anti is not None else None,
        lower_bound=min(factor * f.lower_bound, factor * sampled_min),
        nonneg=f.nonneg and factor >= 0,
        deriv_sup=abs(factor) * f.deriv_sup if f.deriv_sup is not None else None,
        piece_values=pieces,
    )


def add(f: TestFunction, g: TestFunction) -> TestFunction:
    """f + g on a shared domain."""
    if f.domain != g.domain:
        raise ValueError("summands must share a domain")
    fe, ge = f.evaluator, g.evaluator
    anti = None
    if f.antiderivative is not None and g.antiderivative is not None:
        fa, ga = f.antiderivative, g.antiderivative
        anti = lambda x: fa(x) + ga(x)
    return TestFunction(
        name=f"({f.name})+({g.name})",
        evaluator=lambda x: fe(x) + ge(x),
        domain=f.domain,
        breakpoints=f.breakpoints + g.breakpoints,
        antiderivative=anti,
        lower_bound=f.lower_bound + g.lower_bound,
        nonneg=f.nonneg and g.nonneg,
        continuous=f.continuous and g.continuous,
        deriv_sup=(
            f.deriv_sup + g.deriv_sup
            if f.deriv_sup is not None and g.deriv_sup is not None
            else None
        ),
    )


def shift(f: TestFunction, c: float) -> TestFunction:
    """f - c; with c = inf f this lifts the function into the nonneg cone."""
    ev = f.evaluator
    anti = f.antiderivative
    pieces = None
    if f.piece_values is not None:
        pieces = tuple((lo, hi, v - c) for lo, hi, v in f.piece_values)
    sampled_min = float(np.min(f.sample()))
    return replace(
        f,
        name=f"({f.name})-({c:g})",
        evaluator=lambda x: ev(x) - c,
        antiderivative=(lambda x: anti(x) - c * x) if anti is not None else None,
        lower_bound=f.lower_bound - c,
        nonneg=sampled_min - c >= -1e-12,
        piece_values=pieces,
    )


def _detect_crossings(fn, a: float, b: float) -> tuple[float, ...]:
    """Sign changes of fn on [a, b], refined by fixed-count bisection.

    Grid nodes where fn vanishes exactly are roots themselves; strict sign
    flips between nodes are bisected down to float resolution.
    """
    xs = np.linspace(a, b, 2049)
    ys = np.asarray(fn(xs))
    sign = np.sign(ys)
    roots = [float(xs[i]) for i in np.nonzero(sign == 0)[0]]
    for i in np.nonzero(sign[:-1] * sign[1:] < 0)[0]:
        lo, hi = float(xs[i]), float(xs[i + 1])
        flo = float(fn(np.float64(lo)))
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            fmid = float(fn(np.float64(mid)))
            if flo * fmid <= 0:
                hi = mid
            else:
                lo, flo = mid, fmid
        roots.append(0.5 * (lo + hi))
    return tuple(sorted(roots))


def abs_diff(f: TestFunction, g: TestFunction) -> TestFunction:
    """|f - g| with breakpoints at the detected sign crossings.

    No antiderivative survives the absolute value; cell means fall back
    to breakpoint-aware quadrature.
    """
    if f.domain != g.domain:
        raise ValueError("operands must share a domain")
    fe, ge = f.evaluator, g.evaluator
    diff = lambda x: fe(x) - ge(x)
    crossings = _detect_crossings(diff, *f.domain)
    return TestFunction(
        name=f"|{f.name}-{g.name}|",
        evaluator=lambda x: np.abs(fe(x) - ge(x)),
        domain=f.domain,
        breakpoints=f.breakpoints + g.breakpoints + crossings,
        antiderivative=None,
        lower_bound=0.0,
        nonneg=True,
        continuous=f.continuous and g.continuous,
    )


def corpus() -> dict[str, TestFunction]:
    """The default corpus on [0, 1].

    f1: identity; f2: concave C1 bump u(1-u) + 1/4; f3: kink |u - 1/2|;
    f4: indicator of [1/2, 1]; f5: sign-changing line u - 1/2.
    """
    return {
        "f1": TestFunction(
            name="u",
            evaluator=lambda u: u,
            domain=(0.0, 1.0),
            antiderivative=lambda u: 0.5 * u**2,
            lower_bound=0.0,
            deriv_sup=1.0,
        ),
        "f2": TestFunction(
            name="u(1-u)+1/4",
            evaluator=lambda u: u * (1.0 - u) + 0.25,
            domain=(0.0, 1.0),
            antiderivative=lambda u: 0.5 * u**2 - u**3 / 3.0 + 0.25 * u,
            lower_bound=0.25,
            deriv_sup=1.0,
        ),
        "f3": TestFunction(
            name="|u-1/2|",
            evaluator=lambda u: np.abs(u - 0.5),
            domain=(0.0, 1.0),
            breakpoints=(0.5,),
            antiderivative=lambda u: 0.5 * (u - 0.5) * np.abs(u - 0.5),
            lower_bound=0.0,
        ),
        "f4": TestFunction(
            name="1_[1/2,1]",
            evaluator=lambda u: np.where(u >= 0.5, 1.0, 0.0),
            domain=(0.0, 1.0),
            breakpoints=(0.5,),
            antiderivative=lambda u: np.maximum(u - 0.5, 0.0),
            lower_bound=0.0,
            continuous=False,
            piece_values=((0.0, 0.5, 0.0), (0.5, 1.0, 1.0)),
        ),
        "f5": TestFunction(
            name="u-1/2",
            evaluator=lambda u: u - 0.5,
            domain=(0.0, 1.0),
            antiderivative=lambda u: 0.5 * u**2 - 0.5 * u,
            lower_bound=-0.5,
            nonneg=False,
            deriv_sup=1.0,
        ),
    }
