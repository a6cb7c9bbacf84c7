import math
from typing import Optional, Sequence

import numpy as np

from .. import _kernels as K


def dyadic_windows(n: int) -> np.ndarray:
    """Window lengths 1, 2, 4, ... below n, plus n itself."""
    if n < 1:
        return np.zeros(0, np.int64)
    w = [1 << k for k in range(max(n.bit_length(), 1)) if (1 << k) < n]
    return np.array(w + [n], dtype=np.int64)


def window_oscillations(H, windows) -> np.ndarray:
    """For each window length w, max over i of (max - min) of H[i..i+w]."""
    H = np.asarray(H, dtype=np.float64)
    windows = np.asarray(windows, dtype=np.int64)
    order = np.argsort(windows)
    if windows.size and (windows[order[0]] < 1 or windows[order[-1]] > H.size - 1):
        raise ValueError("window lengths must lie in 1..n")
    osc = np.empty(windows.size)
    osc[order] = K.sparse_osc(H, windows[order])
    return osc


def holder_statistic(H, B_n: float, gamma: float, window_grid: Optional[Sequence[int]] = None) -> float:
    """Dyadic proxy for the gamma-Holder norm of t -> (B_n/n) H(nt) on [0, 1].

    The max over window scales w of (B_n/n) osc_w / (w/n)^gamma, where osc_w
    is the largest range of H over w consecutive steps.  This is at most the
    true norm and at least 2^-gamma times it.
    """
    if not 0 < gamma < 1:
        raise ValueError("gamma must lie in (0, 1)")
    H = np.asarray(H)
    n = H.size - 1
    if n < 1:
        return 0.0
    windows = dyadic_windows(n) if window_grid is None else np.asarray(window_grid, np.int64)
    osc = window_oscillations(H, windows)
    terms = (B_n / n) * osc / (windows / n) ** gamma
    return float(terms.max())
