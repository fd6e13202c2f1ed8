"""Minimal deterministic SVG scatter plots.

Every plot uses an 800x600 viewBox with a 70 px left margin, 40 px right,
50 px top and 60 px bottom. Points are steel-blue circles (r = 4); guide
lines are grey, dashed at the first threshold and dotted at the second;
annotations are 11 px text above-right of the point. Coordinates are written
with two decimals so output is byte-stable.
"""

from __future__ import annotations

from typing import Iterable, Optional, Sequence, Tuple
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 800, 600
LEFT, RIGHT, TOP, BOTTOM = 70, 40, 50, 60


def _f(v):
    return f"{v:.2f}"


def _nice_ticks(lo, hi, n=5):
    if hi <= lo:
        return [lo]
    return list(np.linspace(lo, hi, n))


def _fmt_tick(v):
    s = f"{v:.3g}"
    return "0" if s in ("-0", "0") else s


def _range(vals, pad=0.05):
    vals = np.asarray(list(vals), float)
    vals = vals[np.isfinite(vals)]
    if vals.size == 0:
        return 0.0, 1.0
    lo, hi = float(vals.min()), float(vals.max())
    if hi == lo:
        return lo - 0.5, hi + 0.5
    span = hi - lo
    return lo - pad * span, hi + pad * span


def scatter(x, y, *, title="", xlabel="", ylabel="", xlim: Optional[Tuple[float, float]] = None,
            ylim: Optional[Tuple[float, float]] = None, hlines: Sequence[Tuple[float, str]] = (),
            line: Optional[Tuple[Sequence[float], Sequence[float]]] = None,
            annotations: Iterable[Tuple[float, float, str]] = ()) -> str:
    """Render a scatter plot as an SVG string.

    ``hlines`` are ``(y, style)`` pairs with style ``"dashed"``, ``"dotted"``
    or ``"solid"``; ``line`` is an optional polyline ``(xs, ys)``.
    """
    x = np.asarray(x, float).ravel()
    y = np.asarray(y, float).ravel()
    xlim = xlim or _range(x)
    ylim = ylim or _range(np.concatenate([y, [h for h, _ in hlines]]))
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def px(v):
        return LEFT + (v - xlim[0]) / (xlim[1] - xlim[0]) * pw

    def py(v):
        return TOP + (1 - (v - ylim[0]) / (ylim[1] - ylim[0])) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" '
        f'width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.2f}" y="30.00" font-size="16" text-anchor="middle">{escape(title)}</text>',
        f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for t in _nice_ticks(*xlim):
        out.append(f'<line x1="{_f(px(t))}" y1="{TOP + ph}" x2="{_f(px(t))}" y2="{TOP + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{_f(px(t))}" y="{TOP + ph + 20}" font-size="11" text-anchor="middle">{_fmt_tick(t)}</text>')
    for t in _nice_ticks(*ylim):
        out.append(f'<line x1="{LEFT - 5}" y1="{_f(py(t))}" x2="{LEFT}" y2="{_f(py(t))}" stroke="black"/>')
        out.append(f'<text x="{LEFT - 8}" y="{_f(py(t) + 4)}" font-size="11" text-anchor="end">{_fmt_tick(t)}</text>')
    out.append(f'<text x="{LEFT + pw / 2:.2f}" y="{HEIGHT - 15}" font-size="13" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="18" y="{TOP + ph / 2:.2f}" font-size="13" text-anchor="middle" '
               f'transform="rotate(-90 18 {TOP + ph / 2:.2f})">{escape(ylabel)}</text>')
    dash = {"dashed": ' stroke-dasharray="8 4"', "dotted": ' stroke-dasharray="2 3"', "solid": ""}
    for h, style in hlines:
        out.append(f'<line class="guide" x1="{LEFT}" y1="{_f(py(h))}" x2="{LEFT + pw}" y2="{_f(py(h))}" '
                   f'stroke="grey"{dash[style]}/>')
    if line is not None:
        pts = " ".join(f"{_f(px(a))},{_f(py(b))}" for a, b in zip(*line))
        out.append(f'<polyline points="{pts}" fill="none" stroke="black"/>')
    for a, b in zip(x, y):
        if np.isfinite(a) and np.isfinite(b):
            out.append(f'<circle class="point" cx="{_f(px(a))}" cy="{_f(py(b))}" r="4" fill="steelblue"/>')
    for a, b, text in annotations:
        out.append(f'<text class="annotation" x="{_f(px(a) + 6)}" y="{_f(py(b) - 6)}" font-size="11">{escape(text)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def unexpectedness_plot(x, u, *, title="", xlabel="x", thresholds=(0.95, 0.995), annotate_above=0.95) -> str:
    """U against one input coordinate with guides at the two thresholds.

    Points with ``|U| > annotate_above`` carry their value to three decimals.
    """
    x = np.asarray(x, float).ravel()
    u = np.asarray(u, float).ravel()
    hlines = [(0.0, "solid")]
    for t, style in zip(thresholds, ("dashed", "dotted")):
        hlines += [(t, style), (-t, style)]
    notes = [(a, b, f"{b:.3f}") for a, b in zip(x, u) if abs(b) > annotate_above]
    xlim = _range(x) if x.size else (0.0, 1.0)
    return scatter(x, u, title=title, xlabel=xlabel, ylabel="unexpectedness",
                   xlim=xlim, ylim=(-1.05, 1.05), hlines=hlines, annotations=notes)
