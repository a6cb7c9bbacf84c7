from dataclasses import dataclass

import numpy as np

from ..spatial_snake import SpatialSnake


@dataclass(frozen=True, eq=False)
class PeakSet:
    """Finitely many points (x, y) in [0, 1] x R with distinct x."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64)
        if x.shape != y.shape or x.ndim != 1:
            raise ValueError("x and y must be matching vectors")
        if x.size and (x.min() < 0 or x.max() > 1):
            raise ValueError("peak abscissae must lie in [0, 1]")
        if np.unique(x).size != x.size:
            raise ValueError("peak abscissae must be distinct")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    def __len__(self):
        return self.x.size

    def points(self) -> np.ndarray:
        return np.column_stack([self.x, self.y])

    def truncate(self, eta: float) -> "PeakSet":
        keep = np.abs(self.y) > eta
        return PeakSet(self.x[keep], self.y[keep])


def extract_peaks(snake: SpatialSnake, scale: float, eta: float, variant: str = "lex") -> PeakSet:
    """Vertices whose own displacement exceeds eta * scale in absolute value.

    ``y`` is ``Y_u / scale``.  ``x`` is the lex index over n, or for
    ``variant="contour"`` the first contour visit over 2n.
    """
    if not eta > 0:
        raise ValueError("eta must be positive")
    n = max(snake.n, 1)
    idx = np.flatnonzero(np.abs(snake.Y) > eta * scale)
    idx = idx[idx > 0]
    if variant == "lex":
        x = idx / n
    elif variant == "contour":
        x = snake.tree.first_visit[idx] / (2 * n)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return PeakSet(x, snake.Y[idx] / scale)
