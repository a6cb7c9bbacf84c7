import numpy as np

from .. import _kernels as K
from ..offspring_laws import OffspringLaw


def weak_record_times(S) -> np.ndarray:
    """Times k where S[k] >= S[i] for all i < k (time 0 included)."""
    S = np.asarray(S)
    if S.size == 0:
        return np.zeros(0, np.int64)
    prev_max = np.maximum.accumulate(S)
    rec = np.ones(S.size, dtype=bool)
    rec[1:] = S[1:] >= prev_max[:-1]
    return np.flatnonzero(rec)


def height_from_records(W, j: int) -> int:
    """Depth of the j-th vertex as the number of weak records, after time 0,
    of the walk read backwards from j: i -> W[j] - W[j - i]."""
    W = np.asarray(W)
    back = W[j] - W[j::-1]
    return int(weak_record_times(back).size - 1)


def first_ladder_times(
    law: OffspringLaw, rng: np.random.Generator, count: int, horizon: int, chunk: int = 1 << 24
) -> np.ndarray:
    """``count`` i.i.d. copies of tau_1 = inf{k >= 1 : S_k >= 0} for the
    unconditioned walk with steps xi - 1; values above ``horizon`` are
    reported as ``horizon + 1``."""
    out = np.empty(count, np.int64)
    filled = 0
    carry = np.zeros(0, np.int64)
    while filled < count:
        steps = np.concatenate([carry, law.sample(rng, chunk) - 1])
        k, used = K.first_ladder_times(steps, horizon, out[filled:])
        filled += k
        carry = steps[used:]
    return out
