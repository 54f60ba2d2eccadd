"""Dependency-free deterministic SVG scatter plots."""
from __future__ import annotations

import numpy as np

# viridis sampled at 9 evenly spaced stops; colors are linearly interpolated between them
VIRIDIS_STOPS = (
    (0x44, 0x01, 0x54), (0x47, 0x2c, 0x7a), (0x3b, 0x51, 0x8b), (0x2c, 0x71, 0x8e),
    (0x21, 0x90, 0x8d), (0x27, 0xad, 0x81), (0x5c, 0xc8, 0x63), (0xaa, 0xdc, 0x32),
    (0xfd, 0xe7, 0x25),
)
NO_LABEL_COLOR = "#3b518b"


def colormap(values: np.ndarray) -> list[str]:
    v = np.asarray(values, dtype=float)
    lo, hi = float(v.min()), float(v.max())
    t = np.zeros_like(v) if hi == lo else (v - lo) / (hi - lo)
    stops = np.asarray(VIRIDIS_STOPS, dtype=float)
    pos = t * (len(stops) - 1)
    i0 = np.clip(np.floor(pos).astype(int), 0, len(stops) - 2)
    frac = (pos - i0)[:, None]
    rgb = np.rint(stops[i0] * (1 - frac) + stops[i0 + 1] * frac).astype(int)
    return ["#%02x%02x%02x" % tuple(c) for c in rgb]


def scatter_svg(xy: np.ndarray, labels: np.ndarray | None = None,
                rejected: np.ndarray | None = None, size: int = 600,
                radius: float = 3.0, title: str = "") -> str:
    xy = np.asarray(xy, dtype=float)
    if xy.ndim != 2 or xy.shape[1] != 2 or xy.shape[0] == 0:
        raise ValueError("scatter_svg needs a non-empty n x 2 coordinate array")
    n = xy.shape[0]
    rejected = np.zeros(n, bool) if rejected is None else np.asarray(rejected, bool)
    colors = [NO_LABEL_COLOR] * n if labels is None else colormap(labels)
    margin = 20.0
    lo = xy.min(axis=0)
    span = xy.max(axis=0) - lo
    scale = (size - 2 * margin) / max(float(span.max()), 1e-12)
    px = margin + (xy[:, 0] - lo[0]) * scale
    py = size - margin - (xy[:, 1] - lo[1]) * scale
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect x="0" y="0" width="{size}" height="{size}" fill="#ffffff"/>',
    ]
    if title:
        esc = title.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
        out.append(f'<title>{esc}</title>')
    for x, y, c, rej in zip(px, py, colors, rejected):
        if rej:
            out.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{radius:.1f}" fill="none" '
                       f'stroke="{c}" stroke-width="1"/>')
        else:
            out.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{radius:.1f}" fill="{c}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
