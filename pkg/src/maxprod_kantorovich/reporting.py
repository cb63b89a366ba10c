"""Deterministic report emission: CSV, JSON, and hand-rolled SVG plots.

Identical inputs must produce byte-identical files, so floats are pinned
to 12 significant digits everywhere, JSON keys are sorted, and the SVG is
generated directly (no plotting library, hence no embedded ids, fonts, or
version strings that could drift).
"""

from __future__ import annotations

import json
import math
from pathlib import Path

__all__ = [
    "fmt",
    "round12",
    "svg_loglog",
    "write_csv",
    "write_json",
]


def fmt(value) -> str:
    """Fixed text form: 12 significant digits, lowercase booleans, '' for None."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def round12(obj):
    """Recursively pin floats to 12 significant digits for JSON payloads."""
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, float):
        return float(f"{obj:.12g}") if math.isfinite(obj) else repr(obj)
    if isinstance(obj, dict):
        return {k: round12(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round12(v) for v in obj]
    return obj


def write_csv(path, header: list[str], rows: list[dict]) -> Path:
    path = Path(path)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(row.get(col)) for col in header))
    path.write_text("\n".join(lines) + "\n", newline="\n")
    return path


def write_json(path, payload: dict) -> Path:
    path = Path(path)
    text = json.dumps(round12(payload), sort_keys=True, indent=1)
    path.write_text(text + "\n", newline="\n")
    return path


# ----------------------------------------------------------------------
# SVG log-log plots
# ----------------------------------------------------------------------

_PALETTE = (
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
    "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f",
    "#aec7e8", "#ff9896", "#98df8a",
)

_W, _H = 720.0, 540.0
_ML, _MR, _MT, _MB = 80.0, 30.0, 40.0, 70.0


def _ticks(lo: float, hi: float) -> list[int]:
    return list(range(math.floor(lo), math.ceil(hi) + 1))


def svg_loglog(
    series: list[tuple[str, list[tuple[float, float]]]],
    title: str,
    xlabel: str = "n",
    ylabel: str = "error",
    ref_slope: float | None = -1.0,
) -> str:
    """Log-log polyline plot; non-positive values are dropped per series."""
    cleaned = [
        (label, [(x, y) for x, y in pts if x > 0 and y > 0])
        for label, pts in series
    ]
    drawable = [(label, pts) for label, pts in cleaned if pts]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W:g}" height="{_H:g}" '
        f'viewBox="0 0 {_W:g} {_H:g}">',
        f'<rect width="{_W:g}" height="{_H:g}" fill="white"/>',
        f'<text x="{_W / 2:g}" y="24" text-anchor="middle" font-size="16" '
        f'font-family="monospace">{title}</text>',
    ]
    if not drawable:
        parts.append(
            f'<text x="{_W / 2:g}" y="{_H / 2:g}" text-anchor="middle" '
            f'font-size="14" font-family="monospace">no positive data</text></svg>'
        )
        return "\n".join(parts)

    all_x = [math.log10(x) for _, pts in drawable for x, _ in pts]
    all_y = [math.log10(y) for _, pts in drawable for _, y in pts]
    lx0, lx1 = min(all_x), max(all_x)
    ly0, ly1 = min(all_y), max(all_y)
    if lx1 - lx0 < 1e-9:
        lx0, lx1 = lx0 - 0.5, lx1 + 0.5
    if ly1 - ly0 < 1e-9:
        ly0, ly1 = ly0 - 0.5, ly1 + 0.5
    ly0 -= 0.05 * (ly1 - ly0)
    ly1 += 0.05 * (ly1 - ly0)

    def px(lx: float) -> float:
        return _ML + (lx - lx0) / (lx1 - lx0) * (_W - _ML - _MR)

    def py(ly: float) -> float:
        return _H - _MB - (ly - ly0) / (ly1 - ly0) * (_H - _MB - _MT)

    axis = (
        f'<line x1="{_ML:g}" y1="{_H - _MB:g}" x2="{_W - _MR:g}" y2="{_H - _MB:g}" '
        f'stroke="black"/>'
        f'<line x1="{_ML:g}" y1="{_MT:g}" x2="{_ML:g}" y2="{_H - _MB:g}" stroke="black"/>'
    )
    parts.append(axis)
    for t in _ticks(lx0, lx1):
        if lx0 <= t <= lx1:
            x = px(t)
            parts.append(
                f'<line x1="{x:.2f}" y1="{_H - _MB:g}" x2="{x:.2f}" y2="{_H - _MB + 6:g}" '
                f'stroke="black"/>'
                f'<text x="{x:.2f}" y="{_H - _MB + 22:g}" text-anchor="middle" '
                f'font-size="12" font-family="monospace">1e{t}</text>'
            )
    for t in _ticks(ly0, ly1):
        if ly0 <= t <= ly1:
            y = py(t)
            parts.append(
                f'<line x1="{_ML - 6:g}" y1="{y:.2f}" x2="{_ML:g}" y2="{y:.2f}" '
                f'stroke="black"/>'
                f'<text x="{_ML - 10:g}" y="{y + 4:.2f}" text-anchor="end" '
                f'font-size="12" font-family="monospace">1e{t}</text>'
            )
    parts.append(
        f'<text x="{(_ML + _W - _MR) / 2:g}" y="{_H - 18:g}" text-anchor="middle" '
        f'font-size="14" font-family="monospace">{xlabel}</text>'
        f'<text x="20" y="{(_MT + _H - _MB) / 2:g}" text-anchor="middle" '
        f'font-size="14" font-family="monospace" '
        f'transform="rotate(-90 20 {(_MT + _H - _MB) / 2:g})">{ylabel}</text>'
    )

    if ref_slope is not None:
        x_ref, y_ref = drawable[0][1][0]
        lyr0 = math.log10(y_ref) + ref_slope * (lx0 - math.log10(x_ref))
        lyr1 = math.log10(y_ref) + ref_slope * (lx1 - math.log10(x_ref))
        parts.append(
            f'<line x1="{px(lx0):.2f}" y1="{py(lyr0):.2f}" '
            f'x2="{px(lx1):.2f}" y2="{py(lyr1):.2f}" '
            f'stroke="#999999" stroke-dasharray="6 4"/>'
            f'<text x="{px(lx1) - 4:.2f}" y="{py(lyr1) - 6:.2f}" text-anchor="end" '
            f'font-size="11" font-family="monospace" fill="#666666">'
            f'slope {ref_slope:g}</text>'
        )

    for i, (label, pts) in enumerate(drawable):
        color = _PALETTE[i % len(_PALETTE)]
        coords = " ".join(f"{px(math.log10(x)):.2f},{py(math.log10(y)):.2f}" for x, y in pts)
        parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        for x, y in pts:
            parts.append(
                f'<circle cx="{px(math.log10(x)):.2f}" cy="{py(math.log10(y)):.2f}" '
                f'r="2.5" fill="{color}"/>'
            )
        ly = _MT + 16 + 16 * i
        parts.append(
            f'<line x1="{_W - _MR - 150:g}" y1="{ly:g}" x2="{_W - _MR - 126:g}" '
            f'y2="{ly:g}" stroke="{color}" stroke-width="2"/>'
            f'<text x="{_W - _MR - 120:g}" y="{ly + 4:g}" font-size="12" '
            f'font-family="monospace">{label}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts)
