"""Minimal SVG line chart writer (polylines, axes, legend); no plotting dependencies."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence
from xml.sax.saxutils import escape

# metric -> (legend label, colour), drawn in this order
SWEEP_SERIES = {
    "accuracy": ("accuracy", "blue"),
    "ba": ("balanced accuracy", "red"),
    "f1": ("F1 score", "turquoise"),
    "kappa": ("Cohen's kappa", "purple"),
    "pa": ("prediction advantage", "green"),
}

WIDTH, HEIGHT = 720, 480
LEFT, RIGHT, TOP, BOTTOM = 70, 200, 50, 60


@dataclass(frozen=True)
class Series:
    label: str
    color: str
    xs: tuple[float, ...]
    ys: tuple[float, ...]


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def line_chart(
    series: Sequence[Series],
    title: str = "",
    x_label: str = "",
    y_label: str = "",
    y_min: float | None = None,
    y_max: float | None = None,
) -> str:
    xs = [x for s in series for x in s.xs]
    ys = [y for s in series for y in s.ys]
    if not xs:
        xs, ys = [0.0], [0.0]
    x_lo, x_hi = min(xs), max(xs)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    y_lo = min(ys) if y_min is None else min(y_min, min(ys))
    y_hi = max(ys) if y_max is None else max(y_max, max(ys))
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def sx(x: float) -> float:
        return LEFT + (x - x_lo) / (x_hi - x_lo) * pw

    def sy(y: float) -> float:
        return TOP + (y_hi - y) / (y_hi - y_lo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{LEFT + pw / 2}" y="{TOP / 2}" text-anchor="middle" font-size="16">{escape(title)}</text>',
        f'<line x1="{LEFT}" y1="{TOP + ph}" x2="{LEFT + pw}" y2="{TOP + ph}" stroke="black"/>',
        f'<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{TOP + ph}" stroke="black"/>',
    ]
    for t in _ticks(x_lo, x_hi):
        out.append(
            f'<text x="{sx(t):.1f}" y="{TOP + ph + 18}" text-anchor="middle" font-size="11">{_fmt(t)}</text>'
        )
    for t in _ticks(y_lo, y_hi):
        out.append(
            f'<text x="{LEFT - 8}" y="{sy(t) + 4:.1f}" text-anchor="end" font-size="11">{_fmt(t)}</text>'
        )
    if y_lo < 0 < y_hi:
        out.append(
            f'<line x1="{LEFT}" y1="{sy(0):.1f}" x2="{LEFT + pw}" y2="{sy(0):.1f}" '
            'stroke="gray" stroke-dasharray="4 3"/>'
        )
    out.append(
        f'<text x="{LEFT + pw / 2}" y="{HEIGHT - 15}" text-anchor="middle" font-size="13">{escape(x_label)}</text>'
    )
    out.append(
        f'<text x="18" y="{TOP + ph / 2}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 18 {TOP + ph / 2})">{escape(y_label)}</text>'
    )
    for i, s in enumerate(series):
        pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(s.xs, s.ys))
        color = escape(s.color, {'"': "&quot;"})
        if len(s.xs) > 1:
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{pts}"/>')
        for x, y in zip(s.xs, s.ys):
            out.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3" fill="{color}"/>')
        ly = TOP + 20 * i + 10
        lx = LEFT + pw + 15
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 25}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 32}" y="{ly + 4}" font-size="12">{escape(s.label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def sweep_panel_svg(grid, noise: float) -> str:
    """The five comparison curves against imbalance for one noise row of a sweep grid."""
    pts = sorted((p for p in grid.row(noise) if p.ok), key=lambda p: p.imbalance)
    series = []
    for key, (label, color) in SWEEP_SERIES.items():
        xy = [
            (p.imbalance, float(p.pa.pa) if key == "pa" else getattr(p.metrics, key))
            for p in pts
        ]
        xy = [(x, y) for x, y in xy if y is not None]
        series.append(Series(label, color, tuple(x for x, _ in xy), tuple(y for _, y in xy)))
    return line_chart(
        series,
        title=f"label noise {noise:g}",
        x_label="minority fraction",
        y_label="score",
        y_min=0.0,
        y_max=1.0,
    )
