"""Minimal SVG line charts for bound-versus-time traces."""

from __future__ import annotations

from xml.sax.saxutils import escape

_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"]


def line_chart_svg(series: dict[str, tuple[list[float], list[float]]], title: str = "",
                   xlabel: str = "time [s]", ylabel: str = "lower bound",
                   width: int = 640, height: int = 400) -> str:
    """Render ``{label: (xs, ys)}`` as a standalone SVG document."""
    pad_l, pad_r, pad_t, pad_b = 70, 20, 30, 45
    pts = [(x, y) for xs, ys in series.values() for x, y in zip(xs, ys)]
    if not pts:
        pts = [(0.0, 0.0)]
    x0, x1 = min(p[0] for p in pts), max(p[0] for p in pts)
    y0, y1 = min(p[1] for p in pts), max(p[1] for p in pts)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0
    pw, ph = width - pad_l - pad_r, height - pad_t - pad_b

    def sx(x):
        return pad_l + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return pad_t + (1.0 - (y - y0) / (y1 - y0)) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">',
        f'<rect x="{pad_l}" y="{pad_t}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>',
        f'<text x="{width / 2}" y="18" text-anchor="middle" font-size="13">{escape(title)}</text>',
        f'<text x="{pad_l + pw / 2}" y="{height - 8}" text-anchor="middle">{escape(xlabel)}</text>',
        f'<text x="14" y="{pad_t + ph / 2}" text-anchor="middle" transform="rotate(-90 14 {pad_t + ph / 2})">{escape(ylabel)}</text>',
    ]
    for t in range(5):
        fx = x0 + (x1 - x0) * t / 4
        fy = y0 + (y1 - y0) * t / 4
        out.append(f'<text x="{sx(fx):.1f}" y="{pad_t + ph + 15}" text-anchor="middle">{fx:.3g}</text>')
        out.append(f'<text x="{pad_l - 5}" y="{sy(fy) + 4:.1f}" text-anchor="end">{fy:.4g}</text>')
    for k, (label, (xs, ys)) in enumerate(series.items()):
        color = _COLORS[k % len(_COLORS)]
        # Thin out long traces; a chart needs a few thousand points at most.
        step = max(1, len(xs) // 4000)
        path = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs[::step], ys[::step]))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{path}"/>')
        ly = pad_t + 15 + 15 * k
        out.append(f'<line x1="{pad_l + pw - 110}" y1="{ly - 4}" x2="{pad_l + pw - 90}" y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{pad_l + pw - 85}" y="{ly}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
