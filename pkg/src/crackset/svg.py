"""SVG frames of a run. Coordinates are integer lattice units (y axis flipped)."""
from __future__ import annotations

import numpy as np

from .grid_sets import Configuration, Rect


def _rect(x0, y0, x1, y1, n, **attrs):
    a = " ".join(f'{k.replace("_", "-")}="{v}"' for k, v in attrs.items())
    return f'<rect x="{x0}" y="{n - y1}" width="{x1 - x0}" height="{y1 - y0}" {a}/>'


def _cells(mask: np.ndarray, n: int, **attrs) -> list[str]:
    """Row runs of a cell mask as rectangles."""
    out = []
    for j in range(n):
        row = mask[:, j]
        i = 0
        while i < n:
            if row[i]:
                k = i
                while k < n and row[k]:
                    k += 1
                out.append(_rect(i, j, k, j + 1, n, **attrs))
                i = k
            else:
                i += 1
    return out


def frame(config: Configuration, B_sets=(), active: Rect | None = None, box: Rect | None = None,
          label: str = "") -> str:
    """One frame: components shaded by weight, B-sets hatched, the active
    component outlined and its neighbourhood box dashed."""
    n = config.spec.n
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="-1 -3 {n + 2} {n + 4}" '
             f'width="{8 * (n + 2)}" height="{8 * (n + 4)}">',
             '<defs><pattern id="hatch" width="1" height="1" patternUnits="userSpaceOnUse">'
             '<path d="M0,1 L1,0" stroke="#c03" stroke-width="0.15"/></pattern></defs>',
             _rect(0, 0, n, n, n, fill="#fff", stroke="#000", stroke_width="0.1")]
    for c in config.components:
        g = int(round(80 + 120 * (1 - c.weight) / 0.5))
        parts += _cells(c.interior.mask, n, fill=f"rgb({g},{g},{g})")
    for B in B_sets:
        if B.cells.any():
            parts += _cells(B.cells, n, fill="url(#hatch)")
    if active is not None:
        R = active
        parts.append(_rect(R.x0, R.y0, R.x1, R.y1, n, fill="none", stroke="#06c", stroke_width="0.3"))
    if box is not None:
        parts.append(_rect(box.x0, box.y0, box.x1, box.y1, n, fill="none", stroke="#06c",
                           stroke_width="0.15", stroke_dasharray="0.5,0.5"))
    if label:
        parts.append(f'<text x="0" y="-1" font-size="2" font-family="monospace">{label}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
