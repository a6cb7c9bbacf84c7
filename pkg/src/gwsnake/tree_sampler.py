"""Sampling T_n, the Galton-Watson tree conditioned on n+1 vertices.

The main route draws a bridge (``N = n + 1`` i.i.d. steps ``xi - 1``
conditioned to sum to -1) and rotates it at its first minimum, which by the
cycle lemma yields a uniformly chosen rotation that is a Lukasiewicz
excursion.  A direct rejection sampler serves as an independent oracle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .offspring_laws import OffspringLaw
from .tree_codec import PlaneTree

__all__ = [
    "SamplingFailure",
    "BridgeWalk",
    "ShiftWitness",
    "default_budget",
    "sample_bridge",
    "cyclic_shift",
    "valid_shifts",
    "sample_tree",
    "sample_tree_direct",
]

DEBUG_SCAN_MAX_N = 10_000


class SamplingFailure(RuntimeError):
    """Rejection sampling ran out of attempts."""

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


@dataclass(frozen=True, eq=False)
class BridgeWalk:
    increments: np.ndarray
    attempts: int = field(default=1, compare=False)

    @property
    def N(self) -> int:
        return self.increments.size

    @property
    def partial_sums(self) -> np.ndarray:
        S = np.zeros(self.N + 1, np.int64)
        np.cumsum(self.increments, out=S[1:])
        return S


class ShiftWitness(NamedTuple):
    j: int  # 1-based, in 1..N
    shifted: BridgeWalk


def default_budget(n: int) -> int:
    return int(1e6 * math.sqrt(max(n, 1)))


def _shuffled_from_counts(law: OffspringLaw, counts, rng, tail_values=None):
    values = np.repeat(np.arange(counts.size, dtype=np.int64), counts)
    if tail_values is not None and tail_values.size:
        values = np.concatenate([values, tail_values])
    return rng.permutation(values)


def sample_bridge(
    law: OffspringLaw,
    n: int,
    rng: np.random.Generator,
    max_attempts: Optional[int] = None,
    method: str = "counts",
    batch: Optional[int] = None,
) -> BridgeWalk:
    """N = n+1 i.i.d. steps ``xi - 1`` conditioned on summing to -1.

    Whole-vector rejection.  ``method="vector"`` draws each candidate vector
    explicitly.  ``method="counts"`` draws the same candidates through their
    sufficient statistic (multinomial category counts, plus explicit values
    for the tail bucket) and only materialises the accepted vector as a
    uniform shuffle of its multiset; the accepted law is identical.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    N = n + 1
    budget = default_budget(n) if max_attempts is None else int(max_attempts)
    if batch is None:
        # acceptance rate is of order 1/sqrt(N)
        batch = int(min(1024, max(8, 4 * math.sqrt(N))))
    attempts = 0
    if method == "vector":
        while attempts < budget:
            attempts += 1
            xi = law.sample(rng, N)
            if xi.sum() == n:
                return BridgeWalk(xi - 1, attempts)
    elif method == "counts":
        probs = law.category_probs()
        probs = probs / probs.sum()
        K1 = law.table.size
        has_tail = law.tail_mass > 0
        ks = np.arange(K1, dtype=np.int64)
        while attempts < budget:
            m = min(batch, budget - attempts)
            counts = rng.multinomial(N, probs, size=m)
            head = counts[:, :K1] @ ks
            if has_tail:
                n_tail = counts[:, K1]
                total_tail = int(n_tail.sum())
                tail_vals = law.tail_sampler(rng, total_tail) if total_tail else np.zeros(0, np.int64)
                offsets = np.concatenate([[0], np.cumsum(n_tail)])
                cs = np.concatenate([[0], np.cumsum(tail_vals)])
                sums = head + cs[offsets[1:]] - cs[offsets[:-1]]
            else:
                sums = head
            hits = np.flatnonzero(sums == n)
            if hits.size:
                r = int(hits[0])
                attempts += r + 1
                tv = tail_vals[offsets[r] : offsets[r + 1]] if has_tail else None
                xi = _shuffled_from_counts(law, counts[r, :K1], rng, tv)
                return BridgeWalk(xi - 1, attempts)
            attempts += m
    else:
        raise ValueError(f"unknown method {method!r}")
    raise SamplingFailure(
        f"no bridge with sum -1 after {attempts} attempts (n={n}, law={law.family})",
        n=n,
        attempts=attempts,
        law=law.family,
        period=law.period,
        reachable=law.bridge_reachable(n),
    )


def valid_shifts(increments: np.ndarray) -> np.ndarray:
    """All 1-based j whose rotation is a Lukasiewicz excursion.  O(N^2)."""
    N = increments.size
    out = []
    for j in range(1, N + 1):
        rot = np.roll(increments, -j)
        s = np.cumsum(rot)
        if s[-1] == -1 and (N == 1 or s[:-1].min() >= 0):
            out.append(j)
    return np.array(out, dtype=np.int64)


def cyclic_shift(bridge: BridgeWalk, check: Optional[bool] = None) -> ShiftWitness:
    """Rotate the bridge at the first index attaining min S(1..N).

    ``check`` runs the quadratic uniqueness scan; by default it is on only
    for ``n <= 10**4``.
    """
    inc = np.asarray(bridge.increments, dtype=np.int64)
    N = inc.size
    S = np.cumsum(inc)
    j = int(np.argmin(S)) + 1
    shifted = np.roll(inc, -j)  # shifted[k] = inc[(k + j) mod N]
    if check is None:
        check = N - 1 <= DEBUG_SCAN_MAX_N
    if check:
        ok = valid_shifts(inc)
        if ok.size != 1 or ok[0] != j:
            raise AssertionError(f"cycle lemma violated: valid shifts {ok.tolist()}, argmin {j}")
    return ShiftWitness(j, BridgeWalk(shifted, bridge.attempts))


def sample_tree(
    law: OffspringLaw,
    n: int,
    rng: np.random.Generator,
    max_attempts: Optional[int] = None,
    method: str = "counts",
) -> PlaneTree:
    bridge = sample_bridge(law, n, rng, max_attempts=max_attempts, method=method)
    w = cyclic_shift(bridge, check=False)
    return PlaneTree.trusted(w.shifted.increments + 1)


def sample_tree_direct(
    law: OffspringLaw,
    n: int,
    rng: np.random.Generator,
    max_attempts: int = 10**7,
    batch: Optional[int] = None,
) -> PlaneTree:
    """Grow unconditioned trees depth-first and keep the first with n+1 vertices.

    A depth-first exploration of a Galton-Watson tree reads i.i.d. degrees
    until the Lukasiewicz walk first hits -1; the tree has exactly n+1
    vertices iff that happens at step n+1.  Rows are drawn in batches; by
    default about 4 N^(3/2) of them, matching the acceptance rate.
    """
    N = n + 1
    if batch is None:
        batch = int(min(4096, max(8, 4 * N**1.5)))
    attempts = 0
    while attempts < max_attempts:
        m = min(batch, max_attempts - attempts)
        xi = law.sample(rng, m * N).reshape(m, N)
        walk = np.cumsum(xi - 1, axis=1)
        ok = walk[:, -1] == -1
        if N > 1:
            ok &= walk[:, :-1].min(axis=1) >= 0
        hits = np.flatnonzero(ok)
        if hits.size:
            return PlaneTree.trusted(xi[hits[0]])
        attempts += m
    raise SamplingFailure(
        f"no tree of size {N} after {attempts} attempts", n=n, attempts=attempts, law=law.family
    )
