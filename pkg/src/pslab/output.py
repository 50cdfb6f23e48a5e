"""Deterministic writers: CSV, JSON and a dependency-free SVG histogram.

Output bytes must not depend on worker count, dict insertion order or
platform float printing quirks, so floats are rendered with repr()
(shortest round-trip form) and JSON keys are sorted.
"""

from __future__ import annotations

import csv
import json
from fractions import Fraction
from typing import Iterable, Sequence


def render_cell(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    return str(v)


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([render_cell(v) for v in row])


def _json_default(v):
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    raise TypeError(f"not JSON serializable: {type(v)}")


def write_json(path: str, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def dumps_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default)


def svg_histogram(
    values: Sequence[float],
    bins: int = 20,
    width: int = 640,
    height: int = 360,
    title: str = "",
    lo: float | None = None,
    hi: float | None = None,
) -> str:
    """Fixed-geometry bar chart; same input bytes give same output bytes."""
    if not values:
        raise ValueError("empty histogram input")
    vlo = min(values) if lo is None else lo
    vhi = max(values) if hi is None else hi
    if vhi <= vlo:
        vhi = vlo + 1.0
    counts = [0] * bins
    span = vhi - vlo
    for v in values:
        i = int((v - vlo) / span * bins)
        counts[min(max(i, 0), bins - 1)] += 1
    peak = max(counts) or 1
    mtop, mbot = 28, 30
    plot_w, plot_h = width - 2 * 42, height - mtop - mbot
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    if title:
        parts.append(
            f'<text x="{width // 2}" y="18" text-anchor="middle" '
            f'font-family="monospace" font-size="13">{title}</text>'
        )
    bw = plot_w / bins
    for i, c in enumerate(counts):
        bh = plot_h * c / peak
        x = 42 + i * bw
        y = mtop + plot_h - bh
        parts.append(
            f'<rect x="{x:.2f}" y="{y:.2f}" width="{bw - 1:.2f}" height="{bh:.2f}" '
            f'fill="#4477aa"/>'
        )
    parts.append(
        f'<line x1="42" y1="{mtop + plot_h}" x2="{42 + plot_w}" y2="{mtop + plot_h}" '
        f'stroke="black"/>'
    )
    parts.append(
        f'<text x="42" y="{height - 8}" font-family="monospace" font-size="11">{vlo:.4g}</text>'
    )
    parts.append(
        f'<text x="{42 + plot_w}" y="{height - 8}" text-anchor="end" '
        f'font-family="monospace" font-size="11">{vhi:.4g}</text>'
    )
    parts.append(
        f'<text x="6" y="{mtop + 10}" font-family="monospace" font-size="11">{peak}</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts)


def write_svg_histogram(path: str, values: Sequence[float], **kw) -> None:
    with open(path, "w") as fh:
        fh.write(svg_histogram(values, **kw))
        fh.write("\n")
