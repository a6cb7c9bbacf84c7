"""Goodness-of-fit helpers: KS, chi-square and log-log tail slopes."""
from __future__ import annotations

import math
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy import special

__all__ = ["ks_test", "chi_square_uniform", "chi_square_two_sample", "TailFit", "tail_slope"]


def ks_test(samples, reference_cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    """Two-sided one-sample KS p-value from the asymptotic Kolmogorov law,
    with Stephens' finite-sample correction (accurate to a few percent for
    20 or more samples)."""
    x = np.sort(np.asarray(samples, dtype=np.float64))
    n = x.size
    if n < 20:
        raise ValueError("KS test needs at least 20 samples")
    F = np.asarray(reference_cdf(x), dtype=np.float64)
    i = np.arange(1, n + 1)
    D = max((i / n - F).max(), (F - (i - 1) / n).max())
    sq = math.sqrt(n)
    return float(min(1.0, special.kolmogorov((sq + 0.12 + 0.11 / sq) * D)))


def _chi2_sf(stat: float, dof: int) -> float:
    return float(special.gammaincc(dof / 2.0, stat / 2.0))


def chi_square_uniform(counts, min_expected: float = 5.0) -> float:
    """Pearson chi-square p-value of equal cell probabilities (k - 1 dof)."""
    c = np.asarray(counts, dtype=np.float64)
    if c.size < 2:
        raise ValueError("need at least two cells")
    expected = c.sum() / c.size
    if expected < min_expected:
        raise ValueError(f"expected count {expected:.3g} per cell is below {min_expected}")
    stat = float(((c - expected) ** 2).sum() / expected)
    return _chi2_sf(stat, c.size - 1)


def chi_square_two_sample(a, b, min_expected: float = 5.0) -> float:
    """Chi-square homogeneity p-value for two count vectors over the same cells."""
    table = np.vstack([np.asarray(a, float), np.asarray(b, float)])
    keep = table.sum(axis=0) > 0
    table = table[:, keep]
    rows = table.sum(axis=1, keepdims=True)
    cols = table.sum(axis=0, keepdims=True)
    expected = rows * cols / table.sum()
    if expected.min() < min_expected:
        raise ValueError("undersampled cells")
    stat = float(((table - expected) ** 2 / expected).sum())
    return _chi2_sf(stat, table.shape[1] - 1)


class TailFit(NamedTuple):
    slope: float
    stderr: float
    x: np.ndarray
    survival: np.ndarray


def tail_slope(
    samples=None,
    *,
    x=None,
    survival=None,
    xmin: Optional[float] = None,
    xmax: Optional[float] = None,
    n_points: int = 20,
    min_count: int = 10,
    min_decades: float = 2.0,
) -> TailFit:
    """Least-squares slope of log P(X >= x) against log x on a log-spaced grid.

    Give either raw ``samples`` or a table ``(x, survival)``.  For samples the
    grid runs from ``xmin`` (default: the smallest positive sample) to
    ``xmax`` (default: the point beyond which fewer than ``min_count``
    samples remain).  The grid must span at least ``min_decades`` decades.
    The reported standard error is the ordinary regression one and ignores
    the correlation between survival estimates.
    """
    if samples is not None:
        s = np.sort(np.asarray(samples, dtype=np.float64))
        s = s[s > 0]
        if s.size < 2 * min_count:
            raise ValueError("too few positive samples")
        lo = float(s[0]) if xmin is None else float(xmin)
        hi = float(s[-min_count]) if xmax is None else float(xmax)
        if not hi > lo:
            raise ValueError("insufficient range")
        grid = np.geomspace(lo, hi, n_points)
        surv = (s.size - np.searchsorted(s, grid, side="left")) / s.size
    else:
        grid = np.asarray(x, dtype=np.float64)
        surv = np.asarray(survival, dtype=np.float64)
        keep = (grid > 0) & (surv > 0)
        if xmin is not None:
            keep &= grid >= xmin
        if xmax is not None:
            keep &= grid <= xmax
        grid, surv = grid[keep], surv[keep]
    if grid.size < 3:
        raise ValueError("need at least three grid points")
    decades = math.log10(grid[-1] / grid[0])
    if decades < min_decades:
        raise ValueError(f"x-range spans {decades:.2f} decades, fewer than {min_decades}")
    lx, ly = np.log(grid), np.log(surv)
    A = np.column_stack([lx, np.ones_like(lx)])
    coef, res, *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - A @ coef
    dof = max(lx.size - 2, 1)
    sxx = ((lx - lx.mean()) ** 2).sum()
    stderr = math.sqrt((resid @ resid) / dof / sxx)
    return TailFit(float(coef[0]), stderr, grid, surv)
