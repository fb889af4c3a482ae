"""Minimal self-contained SVG line plots (static, no external assets)."""

from __future__ import annotations

import math

_W, _H = 640, 420
_ML, _MR, _MT, _MB = 70, 20, 36, 52
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10.0 ** math.floor(math.log10(raw))
    step = min(s for s in (mag, 2 * mag, 5 * mag, 10 * mag) if s >= raw)
    first = math.ceil(lo / step) * step
    out = []
    t = first
    while t <= hi + 1e-12 * step:
        out.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return out


def line_plot(
    x: list[float],
    series: list[tuple[str, list[float]]],
    *,
    xlabel: str,
    ylabel: str,
    title: str,
    footer: str = "",
) -> str:
    """Render labeled polylines with axes and ticks into an SVG string."""
    xlo, xhi = min(x), max(x)
    ylo = min(min(vals) for _, vals in series)
    yhi = max(max(vals) for _, vals in series)
    if yhi == ylo:
        yhi = ylo + 1.0
    pad = 0.05 * (yhi - ylo)
    ylo, yhi = ylo - pad, yhi + pad
    span_x = xhi - xlo if xhi > xlo else 1.0

    def px(v: float) -> float:
        return _ML + (v - xlo) / span_x * (_W - _ML - _MR)

    def py(v: float) -> float:
        return _H - _MB - (v - ylo) / (yhi - ylo) * (_H - _MT - _MB)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2:.1f}" y="22" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{title}</text>',
    ]
    axis = 'stroke="black" stroke-width="1"'
    parts.append(f'<line x1="{_ML}" y1="{_H - _MB}" x2="{_W - _MR}" y2="{_H - _MB}" {axis}/>')
    parts.append(f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_H - _MB}" {axis}/>')
    for t in _ticks(xlo, xhi):
        parts.append(
            f'<line x1="{px(t):.2f}" y1="{_H - _MB}" x2="{px(t):.2f}" y2="{_H - _MB + 5}" {axis}/>'
            f'<text x="{px(t):.2f}" y="{_H - _MB + 18}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{t:g}</text>'
        )
    for t in _ticks(ylo, yhi):
        parts.append(
            f'<line x1="{_ML - 5}" y1="{py(t):.2f}" x2="{_ML}" y2="{py(t):.2f}" {axis}/>'
            f'<text x="{_ML - 8}" y="{py(t) + 4:.2f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{t:g}</text>'
        )
    parts.append(
        f'<text x="{(_ML + _W - _MR) / 2:.1f}" y="{_H - 16}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">{xlabel}</text>'
    )
    parts.append(
        f'<text x="16" y="{(_MT + _H - _MB) / 2:.1f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 16 {(_MT + _H - _MB) / 2:.1f})">{ylabel}</text>'
    )
    for idx, (label, vals) in enumerate(series):
        color = _COLORS[idx % len(_COLORS)]
        pts = " ".join(f"{px(a):.2f},{py(v):.2f}" for a, v in zip(x, vals))
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        parts.append(
            f'<text x="{_W - _MR - 6}" y="{_MT + 16 + 16 * idx}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11" fill="{color}">{label}</text>'
        )
    if footer:
        parts.append(
            f'<text x="{_ML}" y="{_H - 4}" font-family="monospace" font-size="9" '
            f'fill="#666">{footer}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
