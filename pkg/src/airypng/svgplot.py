"""Self-contained SVG line plots; CSV stays the canonical output format."""

from __future__ import annotations

import math

_W, _H = 640, 420
_ML, _MR, _MT, _MB = 64, 16, 24, 44
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def _ticks(lo: float, hi: float, n: int = 6):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10.0 ** math.floor(math.log10(raw))
    step = min(s for s in (mag, 2 * mag, 2.5 * mag, 5 * mag, 10 * mag)
               if s >= raw)
    start = math.ceil(lo / step) * step
    out = []
    v = start
    while v <= hi + 1e-12 * step:
        out.append(round(v, 12))
        v += step
    return out


def line_plot_svg(series, title: str, xlabel: str, ylabel: str,
                  header_comment: str = "") -> str:
    """Render named (x, y) series as an SVG document string.

    ``series`` is a list of (label, xs, ys).
    """
    xs_all = [x for _l, xs, _y in series for x in xs]
    ys_all = [y for _l, _x, ys in series for y in ys]
    xlo, xhi = min(xs_all), max(xs_all)
    ylo, yhi = min(ys_all), max(ys_all)
    if xhi == xlo:
        xhi = xlo + 1.0
    if yhi == ylo:
        yhi = ylo + 1.0
    pad = 0.05 * (yhi - ylo)
    ylo -= pad
    yhi += pad
    pw = _W - _ML - _MR
    ph = _H - _MT - _MB

    def sx(x):
        return _ML + pw * (x - xlo) / (xhi - xlo)

    def sy(y):
        return _MT + ph * (1.0 - (y - ylo) / (yhi - ylo))

    parts = ['<?xml version="1.0" encoding="UTF-8"?>']
    if header_comment:
        safe = header_comment.replace("--", "- -")
        parts.append(f"<!-- {safe} -->")
    parts.append(f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" '
                 f'height="{_H}" viewBox="0 0 {_W} {_H}">')
    parts.append(f'<rect width="{_W}" height="{_H}" fill="white"/>')
    parts.append(f'<text x="{_W / 2}" y="16" text-anchor="middle" '
                 f'font-size="14">{title}</text>')
    for tx in _ticks(xlo, xhi):
        parts.append(f'<line x1="{sx(tx):.1f}" y1="{_MT + ph}" '
                     f'x2="{sx(tx):.1f}" y2="{_MT + ph + 5}" stroke="black"/>')
        parts.append(f'<text x="{sx(tx):.1f}" y="{_MT + ph + 18}" '
                     f'text-anchor="middle" font-size="11">{tx:g}</text>')
    for ty in _ticks(ylo, yhi):
        parts.append(f'<line x1="{_ML - 5}" y1="{sy(ty):.1f}" x2="{_ML}" '
                     f'y2="{sy(ty):.1f}" stroke="black"/>')
        parts.append(f'<text x="{_ML - 8}" y="{sy(ty) + 4:.1f}" '
                     f'text-anchor="end" font-size="11">{ty:g}</text>')
    parts.append(f'<rect x="{_ML}" y="{_MT}" width="{pw}" height="{ph}" '
                 f'fill="none" stroke="black"/>')
    parts.append(f'<text x="{_ML + pw / 2}" y="{_H - 8}" text-anchor="middle" '
                 f'font-size="12">{xlabel}</text>')
    parts.append(f'<text x="16" y="{_MT + ph / 2}" text-anchor="middle" '
                 f'font-size="12" transform="rotate(-90 16 {_MT + ph / 2})">'
                 f'{ylabel}</text>')
    for k, (label, xs, ys) in enumerate(series):
        color = _COLORS[k % len(_COLORS)]
        pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))
        parts.append(f'<polyline points="{pts}" fill="none" '
                     f'stroke="{color}" stroke-width="1.5"/>')
        parts.append(f'<text x="{_ML + pw - 6}" y="{_MT + 16 + 14 * k}" '
                     f'text-anchor="end" font-size="11" fill="{color}">'
                     f'{label}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
