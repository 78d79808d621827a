"""Minimal deterministic SVG line charts.

Byte-for-byte reproducible for identical inputs: fixed palette and layout,
fixed-precision coordinates, no timestamps, ids, or random attributes.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
           "#8c564b", "#17becf", "#7f7f7f")

_W, _H = 960.0, 600.0
_ML, _MR, _MT, _MB = 86.0, 30.0, 52.0, 58.0


def _ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    """Round tick positions covering [lo, hi]; deterministic 1-2-5 ladder."""
    span = hi - lo
    if span <= 0 or not math.isfinite(span):
        return [lo]
    raw = span / max(target, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    first = math.ceil(lo / step) * step
    out = []
    v = first
    while v <= hi + 0.5 * step:
        out.append(0.0 if abs(v) < 1e-12 * step else v)
        v += step
    return out


def _fmt(x: float) -> str:
    return format(x, ".6g")


def render_chart(title: str, xlabel: str, ylabel: str,
                 curves: list[tuple[str, np.ndarray, np.ndarray]]) -> str:
    """One SVG document: axes, ticks, one polyline and legend entry per curve.

    curves is a list of (label, x, y); x and y are equal-length 1-D arrays.
    """
    xs = np.concatenate([np.asarray(x, dtype=float) for _, x, _ in curves])
    ys = np.concatenate([np.asarray(y, dtype=float) for _, _, y in curves])
    xlo, xhi = float(np.min(xs)), float(np.max(xs))
    ylo, yhi = float(np.min(ys)), float(np.max(ys))
    if xhi <= xlo:
        xlo, xhi = xlo - 0.5, xlo + 0.5
    if yhi <= ylo:
        pad = 1.0 if ylo == 0 else abs(ylo) * 0.1
        ylo, yhi = ylo - pad, ylo + pad
    else:
        pad = 0.04 * (yhi - ylo)
        ylo, yhi = ylo - pad, yhi + pad

    px = _W - _ML - _MR
    py = _H - _MT - _MB

    def X(v: float) -> float:
        return _ML + (v - xlo) / (xhi - xlo) * px

    def Y(v: float) -> float:
        return _MT + (yhi - v) / (yhi - ylo) * py

    parts: list[str] = []
    parts.append(f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W:.0f}" '
                 f'height="{_H:.0f}" viewBox="0 0 {_W:.0f} {_H:.0f}">')
    parts.append(f'<rect x="0" y="0" width="{_W:.0f}" height="{_H:.0f}" fill="#ffffff"/>')
    parts.append(f'<text x="{_W / 2:.1f}" y="30" font-family="sans-serif" font-size="18" '
                 f'text-anchor="middle">{escape(title)}</text>')

    for v in _ticks(ylo, yhi):
        y = Y(v)
        parts.append(f'<line x1="{_ML:.1f}" y1="{y:.2f}" x2="{_W - _MR:.1f}" y2="{y:.2f}" '
                     f'stroke="#dddddd" stroke-width="1"/>')
        parts.append(f'<text x="{_ML - 8:.1f}" y="{y + 4:.2f}" font-family="sans-serif" '
                     f'font-size="12" text-anchor="end">{escape(_fmt(v))}</text>')
    for v in _ticks(xlo, xhi):
        x = X(v)
        parts.append(f'<line x1="{x:.2f}" y1="{_MT + py:.1f}" x2="{x:.2f}" '
                     f'y2="{_MT + py + 5:.1f}" stroke="#333333" stroke-width="1"/>')
        parts.append(f'<text x="{x:.2f}" y="{_MT + py + 20:.1f}" font-family="sans-serif" '
                     f'font-size="12" text-anchor="middle">{escape(_fmt(v))}</text>')

    parts.append(f'<line x1="{_ML:.1f}" y1="{_MT:.1f}" x2="{_ML:.1f}" y2="{_MT + py:.1f}" '
                 f'stroke="#333333" stroke-width="1.5"/>')
    parts.append(f'<line x1="{_ML:.1f}" y1="{_MT + py:.1f}" x2="{_W - _MR:.1f}" '
                 f'y2="{_MT + py:.1f}" stroke="#333333" stroke-width="1.5"/>')
    parts.append(f'<text x="{_ML + px / 2:.1f}" y="{_H - 12:.1f}" font-family="sans-serif" '
                 f'font-size="14" text-anchor="middle">{escape(xlabel)}</text>')
    parts.append(f'<text x="22" y="{_MT + py / 2:.1f}" font-family="sans-serif" font-size="14" '
                 f'text-anchor="middle" transform="rotate(-90 22 {_MT + py / 2:.1f})">'
                 f'{escape(ylabel)}</text>')

    for i, (label, x, y) in enumerate(curves):
        color = PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{X(float(a)):.2f},{Y(float(b)):.2f}"
                       for a, b in zip(np.asarray(x, dtype=float), np.asarray(y, dtype=float)))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                     f'stroke-width="2"/>')

    ly = _MT + 10.0
    lx = _W - _MR - 170.0
    parts.append(f'<rect x="{lx - 10:.1f}" y="{ly - 14:.1f}" width="180" '
                 f'height="{18 * len(curves) + 10:.0f}" fill="#ffffff" stroke="#999999" '
                 f'stroke-width="0.5"/>')
    for i, (label, _x, _y) in enumerate(curves):
        color = PALETTE[i % len(PALETTE)]
        yy = ly + 18.0 * i
        parts.append(f'<line x1="{lx:.1f}" y1="{yy:.1f}" x2="{lx + 24:.1f}" y2="{yy:.1f}" '
                     f'stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{lx + 30:.1f}" y="{yy + 4:.1f}" font-family="sans-serif" '
                     f'font-size="12">{escape(label)}</text>')

    parts.append("</svg>")
    return "\n".join(parts) + "\n"
