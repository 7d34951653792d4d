"""Minimal native SVG charts for sweep results."""

from __future__ import annotations

from xml.sax.saxutils import escape

WIDTH, HEIGHT = 960, 600
MARGIN = (70, 30, 40, 60)  # left, right, top, bottom
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf")


def _scale(lo: float, hi: float, a: float, b: float):
    if hi == lo:
        hi = lo + 1
    return lambda v: a + (v - lo) * (b - a) / (hi - lo)


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi == lo:
        return [lo]
    return [lo + (hi - lo) * i / n for i in range(n + 1)]


def _frame(title: str, xlabel: str, ylabel: str, xs: list[float], ys: list[float]):
    left, right, top, bottom = MARGIN
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(0.0, min(ys)), max(ys)
    sx = _scale(x0, x1, left, WIDTH - right)
    sy = _scale(y0, y1, HEIGHT - bottom, top)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="24" text-anchor="middle" font-size="16">{escape(title)}</text>',
        f'<line x1="{left}" y1="{HEIGHT - bottom}" x2="{WIDTH - right}" y2="{HEIGHT - bottom}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{HEIGHT - bottom}" stroke="black"/>',
        f'<text x="{WIDTH / 2}" y="{HEIGHT - 15}" text-anchor="middle" font-size="13">{escape(xlabel)}</text>',
        f'<text x="18" y="{HEIGHT / 2}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 18 {HEIGHT / 2})">{escape(ylabel)}</text>',
    ]
    for v in _ticks(x0, x1):
        out.append(f'<text x="{sx(v):.1f}" y="{HEIGHT - bottom + 16}" text-anchor="middle" font-size="11">{v:g}</text>')
    for v in _ticks(y0, y1):
        out.append(f'<text x="{left - 6}" y="{sy(v) + 4:.1f}" text-anchor="end" font-size="11">{v:.4g}</text>')
    return out, sx, sy


def line_chart(series: dict[str, list[tuple[float, float]]], title: str, xlabel: str, ylabel: str) -> str:
    """One polyline per series, in the given key order."""
    pts = [p for s in series.values() for p in s]
    if not pts:
        pts = [(0.0, 0.0)]
    out, sx, sy = _frame(title, xlabel, ylabel, [p[0] for p in pts], [p[1] for p in pts])
    for i, (name, s) in enumerate(series.items()):
        colour = PALETTE[i % len(PALETTE)]
        coords = " ".join(f"{sx(x):.1f},{sy(y):.1f}" for x, y in sorted(s))
        out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="2" points="{coords}"/>')
        for x, y in s:
            out.append(f'<circle cx="{sx(x):.1f}" cy="{sy(y):.1f}" r="3" fill="{colour}"/>')
        out.append(f'<text x="{WIDTH - MARGIN[1] - 150}" y="{MARGIN[2] + 16 * (i + 1)}" font-size="12" '
                   f'fill="{colour}">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def scatter_chart(series: dict[str, list[tuple[float, float]]], title: str, xlabel: str, ylabel: str) -> str:
    pts = [p for s in series.values() for p in s] or [(0.0, 0.0)]
    out, sx, sy = _frame(title, xlabel, ylabel, [p[0] for p in pts], [p[1] for p in pts])
    for i, (name, s) in enumerate(series.items()):
        colour = PALETTE[i % len(PALETTE)]
        for x, y in s:
            out.append(f'<circle cx="{sx(x):.1f}" cy="{sy(y):.1f}" r="4" fill="{colour}"/>')
        out.append(f'<text x="{WIDTH - MARGIN[1] - 150}" y="{MARGIN[2] + 16 * (i + 1)}" font-size="12" '
                   f'fill="{colour}">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
