import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from .peaks import PeakSet

BRUTE_FORCE_LIMIT = 4_000_000


@dataclass(frozen=True, eq=False)
class CompactSet:
    """Union of polylines and isolated points in [0, 1] x R.

    ``eps`` is the spacing used when polylines are discretised.
    """

    polylines: Sequence[np.ndarray] = field(default_factory=tuple)
    points: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))
    eps: float = 1e-3

    def __post_init__(self):
        lines = tuple(np.atleast_2d(np.asarray(p, dtype=np.float64)) for p in self.polylines)
        pts = np.asarray(self.points, dtype=np.float64).reshape(-1, 2)
        if not lines and not pts.size:
            raise ValueError("compact set is empty")
        for p in lines:
            if p.shape[1] != 2 or p.shape[0] == 0:
                raise ValueError("polylines are (k, 2) arrays with k >= 1")
        object.__setattr__(self, "polylines", lines)
        object.__setattr__(self, "points", pts)

    def segments(self) -> np.ndarray:
        """(m, 2, 2) array of segments; isolated points become degenerate segments."""
        segs = [np.stack([p[:-1], p[1:]], axis=1) for p in self.polylines if len(p) > 1]
        singles = [p for p in self.polylines if len(p) == 1] + [self.points]
        pts = np.concatenate(singles) if singles else np.zeros((0, 2))
        segs.append(np.stack([pts, pts], axis=1))
        return np.concatenate(segs)

    def sample(self, eps=None) -> np.ndarray:
        """Points at spacing <= eps along every segment, endpoints included."""
        eps = self.eps if eps is None else eps
        segs = self.segments()
        a, b = segs[:, 0], segs[:, 1]
        length = np.hypot(*(b - a).T)
        k = np.maximum(np.ceil(length / eps).astype(np.int64), 1)
        rep = np.repeat(np.arange(segs.shape[0]), k + 1)
        start = np.concatenate([[0], np.cumsum(k + 1)[:-1]])
        t = (np.arange(rep.size) - np.repeat(start, k + 1)) / np.repeat(k, k + 1)
        pts = a[rep] + t[:, None] * (b - a)[rep]
        return np.unique(pts, axis=0)


def _point_segment_dist(P: np.ndarray, segs: np.ndarray, chunk: int = 2048) -> np.ndarray:
    """min over segments of the euclidean distance from each point."""
    a = segs[:, 0]
    d = segs[:, 1] - a
    dd = (d * d).sum(axis=1)
    safe = np.where(dd > 0, dd, 1.0)
    out = np.empty(P.shape[0])
    for s in range(0, P.shape[0], chunk):
        q = P[s : s + chunk, None, :] - a[None]
        t = np.where(dd > 0, np.clip((q * d).sum(-1) / safe, 0.0, 1.0), 0.0)
        r = q - t[..., None] * d
        out[s : s + chunk] = np.sqrt((r * r).sum(-1).min(axis=1))
    return out


def directed_hausdorff(A: CompactSet, B: CompactSet, eps=None) -> float:
    """sup over a in A of dist(a, B), A discretised at spacing eps."""
    P = A.sample(eps)
    segs = B.segments()
    if P.shape[0] * segs.shape[0] <= BRUTE_FORCE_LIMIT:
        return float(_point_segment_dist(P, segs).max())
    Q = B.sample(eps)
    dist, _ = cKDTree(Q).query(P)
    return float(dist.max())


def hausdorff_distance(A: CompactSet, B: CompactSet, eps=None) -> float:
    """Hausdorff distance, accurate to within eps (the coarser of the two sets'
    spacings by default)."""
    if eps is None:
        eps = max(A.eps, B.eps)
    return max(directed_hausdorff(A, B, eps), directed_hausdorff(B, A, eps))


def graph_with_peaks(f, peaks: PeakSet, eps: float = 1e-3) -> CompactSet:
    """Graph of f (sampled at x_i = i / (len(f) - 1)) together with a vertical
    segment from (x, f(x)) to (x, f(x) + y) for each peak, x snapped to the grid."""
    f = np.asarray(f, dtype=np.float64)
    m = f.size - 1
    xs = np.linspace(0.0, 1.0, f.size) if m > 0 else np.zeros(1)
    lines = [np.column_stack([xs, f])]
    for x, y in zip(peaks.x, peaks.y):
        i = int(round(x * m))
        base = f[i]
        lines.append(np.array([[xs[i], base], [xs[i], base + y]]))
    return CompactSet(lines, eps=eps)
