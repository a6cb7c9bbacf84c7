"""Deterministic SVG (and CSV) output for processes, snakes and trees."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .snake_stats.peaks import PeakSet
from .spatial_snake import SpatialSnake
from .tree_codec import PlaneTree


@dataclass
class Series:
    name: str
    values: np.ndarray
    color: str = "#1f4e79"
    width: float = 1.0


@dataclass
class PlotSpec:
    series: List[Series]
    x_range: Optional[Tuple[float, float]] = None
    y_range: Optional[Tuple[float, float]] = None
    fmt: str = "svg"
    width: int = 640
    height: int = 320
    # vertical spikes as (x_index, y_from, y_to), drawn over the series
    spikes: List[Tuple[float, float, float]] = field(default_factory=list)
    title: str = ""


def _num(v: float) -> str:
    return f"{v:.6g}"


def _ranges(spec: PlotSpec):
    if spec.x_range is not None:
        x0, x1 = spec.x_range
    else:
        x0, x1 = 0.0, float(max(len(s.values) for s in spec.series) - 1)
    if spec.y_range is not None:
        y0, y1 = spec.y_range
    else:
        ys = np.concatenate([np.asarray(s.values, float) for s in spec.series] +
                            [np.array([a for sp in spec.spikes for a in sp[1:]], float)])
        y0, y1 = float(ys.min()), float(ys.max())
    if not all(map(math.isfinite, (x0, x1, y0, y1))):
        raise ValueError("plot ranges must be finite")
    if x1 == x0:
        x1 = x0 + 1
    if y1 == y0:
        y0, y1 = y0 - 1, y1 + 1
    return x0, x1, y0, y1


def emit_plot(spec: PlotSpec, path=None) -> bytes:
    """Render ``spec``; write to ``path`` if given.  Same input, same bytes."""
    if not spec.series:
        raise ValueError("plot needs at least one series")
    if spec.fmt == "csv":
        lines = ["series,index,value"]
        for s in spec.series:
            lines += [f"{s.name},{i},{float(v)!r}" for i, v in enumerate(np.asarray(s.values).tolist())]
        data = ("\n".join(lines) + "\n").encode()
    elif spec.fmt == "svg":
        data = _svg(spec).encode()
    else:
        raise ValueError(f"unknown plot format {spec.fmt!r}")
    if path is not None:
        with open(path, "wb") as fh:
            fh.write(data)
    return data


def _svg(spec: PlotSpec) -> str:
    x0, x1, y0, y1 = _ranges(spec)
    W, H, pad = spec.width, spec.height, 20

    def px(x):
        return pad + (x - x0) / (x1 - x0) * (W - 2 * pad)

    def py(y):
        return H - pad - (y - y0) / (y1 - y0) * (H - 2 * pad)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<rect width="{W}" height="{H}" fill="white"/>',
    ]
    if spec.title:
        out.append(f'<title>{spec.title}</title>')
    if y0 < 0 < y1:
        out.append(f'<line class="axis" x1="{pad}" y1="{_num(py(0))}" x2="{W - pad}" y2="{_num(py(0))}" stroke="#bbb" stroke-width="0.5"/>')
    for s in spec.series:
        v = np.asarray(s.values, float)
        pts = " ".join(f"{_num(px(i))},{_num(py(y))}" for i, y in enumerate(v.tolist()))
        out.append(f'<polyline class="series" data-name="{s.name}" fill="none" stroke="{s.color}" '
                   f'stroke-width="{_num(s.width)}" points="{pts}"/>')
    for x, a, b in spec.spikes:
        out.append(f'<line class="peak" x1="{_num(px(x))}" y1="{_num(py(a))}" x2="{_num(px(x))}" '
                   f'y2="{_num(py(b))}" stroke="#c0392b" stroke-width="1"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def process_plot(name: str, values, fmt: str = "svg") -> PlotSpec:
    return PlotSpec([Series(name, np.asarray(values))], fmt=fmt, title=name)


def snake_plot(snake: SpatialSnake, peaks: Optional[PeakSet] = None, scale: float = 1.0, fmt: str = "svg") -> PlotSpec:
    """Hsp / scale with one red spike per peak, from the parent's position to the peak vertex's."""
    S = snake.S / scale
    spikes = []
    if peaks is not None and len(peaks):
        n = max(snake.n, 1)
        par = snake.tree.parent
        for x in peaks.x.tolist():
            v = int(round(x * n))
            spikes.append((float(v), float(S[par[v]]), float(S[v])))
    return PlotSpec([Series("Hsp", S)], spikes=spikes, fmt=fmt, title="spatial height process")


def _ramp(t: float) -> str:
    # blue -> red through white-ish purple
    t = min(max(t, 0.0), 1.0)
    r = int(round(40 + 200 * t))
    g = int(round(60 + 40 * (1 - abs(2 * t - 1))))
    b = int(round(240 - 200 * t))
    return f"#{r:02x}{g:02x}{b:02x}"


def tree_svg(tree: PlaneTree, positions=None, layout: str = "radial", size: int = 640) -> str:
    """Tree drawing.  ``radial`` puts vertex v at angle 2 pi (first contour
    visit)/(2n) and radius depth; ``layered`` at (lex index, depth).  Vertex
    colours run from blue (lowest position) to red (highest)."""
    n = max(tree.n, 1)
    depth = tree.depth.astype(float)
    if layout == "radial":
        ang = 2 * math.pi * tree.first_visit / (2 * n)
        r = depth / max(depth.max(), 1)
        X = 0.5 + 0.45 * r * np.cos(ang)
        Y = 0.5 + 0.45 * r * np.sin(ang)
    elif layout == "layered":
        X = 0.05 + 0.9 * np.arange(tree.degrees.size) / n
        Y = 0.05 + 0.9 * depth / max(depth.max(), 1)
    else:
        raise ValueError(f"unknown layout {layout!r}")
    if positions is None:
        col = ["#333333"] * tree.degrees.size
    else:
        p = np.asarray(positions, float)
        lo, hi = float(p.min()), float(p.max())
        col = [_ramp((v - lo) / (hi - lo) if hi > lo else 0.5) for v in p.tolist()]
    X, Y = (X * size).tolist(), (Y * size).tolist()
    par = tree.parent.tolist()
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
           f'<rect width="{size}" height="{size}" fill="white"/>']
    for v in range(1, len(par)):
        u = par[v]
        out.append(f'<line x1="{_num(X[u])}" y1="{_num(Y[u])}" x2="{_num(X[v])}" y2="{_num(Y[v])}" '
                   f'stroke="{col[v]}" stroke-width="0.6"/>')
    rad = 2.0 if len(par) < 2000 else 0.8
    for v in range(len(par)):
        out.append(f'<circle cx="{_num(X[v])}" cy="{_num(Y[v])}" r="{rad}" fill="{col[v]}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
