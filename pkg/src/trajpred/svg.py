"""Dependency-free SVG line charts (polyline + axes + legend)."""

from __future__ import annotations

__all__ = ["line_chart"]

_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"]


def line_chart(x: list[float], series: dict[str, list[float]], path,
               title: str = "", xlabel: str = "", ylabel: str = "",
               width: int = 640, height: int = 420) -> None:
    if not x or not series:
        raise ValueError("need at least one x value and one series")
    left, right, top, bottom = 70, 20, 40, 50
    pw, ph = width - left - right, height - top - bottom
    ys = [v for vals in series.values() for v in vals]
    x_min, x_max = min(x), max(x)
    y_min, y_max = min(ys), max(ys)
    if x_max == x_min:
        x_max = x_min + 1.0
    if y_max == y_min:
        y_max = y_min + 1.0

    def sx(v):
        return left + (v - x_min) / (x_max - x_min) * pw

    def sy(v):
        return top + ph - (v - y_min) / (y_max - y_min) * ph

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>',
    ]
    if title:
        parts.append(f'<text x="{width / 2}" y="24" text-anchor="middle" '
                     f'font-size="16">{title}</text>')
    if xlabel:
        parts.append(f'<text x="{left + pw / 2}" y="{height - 10}" '
                     f'text-anchor="middle" font-size="12">{xlabel}</text>')
    if ylabel:
        parts.append(f'<text x="16" y="{top + ph / 2}" text-anchor="middle" '
                     f'font-size="12" transform="rotate(-90 16 {top + ph / 2})">{ylabel}</text>')
    # axis ticks at the extremes
    for v in (x_min, x_max):
        parts.append(f'<text x="{sx(v)}" y="{top + ph + 18}" text-anchor="middle" '
                     f'font-size="11">{v:g}</text>')
    for v in (y_min, y_max):
        parts.append(f'<text x="{left - 8}" y="{sy(v) + 4}" text-anchor="end" '
                     f'font-size="11">{v:.3g}</text>')
    for idx, (name, vals) in enumerate(series.items()):
        color = _COLORS[idx % len(_COLORS)]
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x, vals))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="2"/>')
        ly = top + 16 * (idx + 1)
        parts.append(f'<line x1="{left + pw - 110}" y1="{ly - 4}" x2="{left + pw - 90}" '
                     f'y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{left + pw - 84}" y="{ly}" font-size="12">{name}</text>')
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts))
