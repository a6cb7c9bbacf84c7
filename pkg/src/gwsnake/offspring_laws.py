"""Critical offspring distributions and their normalising sequences.

A law is stored as an explicit probability table ``table[k] = mu(k)`` for
``k <= k_max`` plus, for infinite-support families, an exact sampler for the
residual tail ``{k > k_max}``.  Every built-in law has mean exactly one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from scipy import special

__all__ = [
    "OffspringLaw",
    "Normalization",
    "LawError",
    "geometric",
    "poisson",
    "binary",
    "stable_tail",
    "custom",
    "parse_law",
    "sample_offspring",
    "normalization_for",
]

TailSampler = Callable[[np.random.Generator, int], np.ndarray]


class LawError(ValueError):
    """Raised for invalid or incompatible law configurations."""


@dataclass(frozen=True, eq=False)
class OffspringLaw:
    family: str
    table: np.ndarray
    alpha: float
    sigma2: float
    tail_mass: float = 0.0
    tail_mean: float = 0.0
    tail_sampler: Optional[TailSampler] = field(default=None, repr=False)
    tail_sf: Optional[Callable[[int], float]] = field(default=None, repr=False)
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        table = np.asarray(self.table, dtype=np.float64)
        object.__setattr__(self, "table", table)
        table.setflags(write=False)
        if table.ndim != 1 or table.size == 0 or np.any(table < 0):
            raise LawError("probability table must be a non-empty nonnegative vector")
        if not 1.0 < self.alpha <= 2.0:
            raise LawError(f"alpha must lie in (1, 2], got {self.alpha}")
        if (self.alpha < 2.0) != math.isinf(self.sigma2):
            raise LawError("infinite variance must coincide with alpha < 2")
        if table[0] <= 0:
            raise LawError("mu(0) must be positive")
        total = math.fsum(table) + self.tail_mass
        if abs(total - 1.0) > 1e-12:
            raise LawError(f"probabilities sum to {total!r}, not 1")
        if abs(self.mean - 1.0) > 1e-12:
            raise LawError(f"law is not critical: mean {self.mean!r}")
        if self.tail_mass > 0 and self.tail_sampler is None:
            raise LawError("a tail sampler is required when tail_mass > 0")

    @property
    def k_max(self) -> int:
        return self.table.size - 1

    @property
    def mu0(self) -> float:
        return float(self.table[0])

    @property
    def mean(self) -> float:
        k = np.arange(self.table.size)
        return math.fsum(k * self.table) + self.tail_mean

    @cached_property
    def period(self) -> int:
        """Span of the support: gcd of differences between atoms.  1 means aperiodic."""
        support = np.nonzero(self.table)[0]
        g = 0
        for k in support:
            g = math.gcd(g, int(k - support[0]))
        if self.tail_mass > 0:
            # every infinite-support family here has consecutive tail atoms
            g = 1
        return g

    def bridge_reachable(self, n: int) -> bool:
        """Whether n+1 steps ``xi - 1`` can sum to -1 on the support lattice."""
        d = self.period
        if d == 0:
            return int(np.nonzero(self.table)[0][0]) * (n + 1) == n
        k0 = int(np.nonzero(self.table)[0][0])
        return (k0 * (n + 1) - n) % d == 0

    def pmf(self, k: int) -> float:
        if k < 0:
            return 0.0
        if k <= self.k_max:
            return float(self.table[k])
        if self.tail_sf is None:
            return 0.0
        return self.tail_sf(k) - self.tail_sf(k + 1)

    def sf(self, k: int) -> float:
        """P(xi >= k)."""
        if k <= 0:
            return 1.0
        if k > self.k_max:
            return 0.0 if self.tail_sf is None else self.tail_sf(k)
        return math.fsum(self.table[k:]) + self.tail_mass

    @cached_property
    def _alias(self) -> tuple[np.ndarray, np.ndarray]:
        # Vose's alias method on the table renormalised to sum 1
        p = self.table / math.fsum(self.table)
        m = p.size
        scaled = p * m
        prob = np.zeros(m)
        alias = np.zeros(m, dtype=np.int64)
        small = [i for i in range(m) if scaled[i] < 1.0]
        large = [i for i in range(m) if scaled[i] >= 1.0]
        while small and large:
            s = small.pop()
            g = large.pop()
            prob[s] = scaled[s]
            alias[s] = g
            scaled[g] = (scaled[g] + scaled[s]) - 1.0
            (small if scaled[g] < 1.0 else large).append(g)
        for i in large + small:
            prob[i] = 1.0
        return prob, alias

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draw ``size`` i.i.d. offspring counts."""
        prob, alias = self._alias
        col = rng.integers(0, prob.size, size=size)
        coin = rng.random(size)
        out = np.where(coin < prob[col], col, alias[col]).astype(np.int64)
        if self.tail_mass > 0:
            in_tail = rng.random(size) < self.tail_mass
            n_tail = int(in_tail.sum())
            if n_tail:
                out[in_tail] = self.tail_sampler(rng, n_tail)
        return out

    def category_probs(self) -> np.ndarray:
        """Table probabilities followed by the tail bucket (for multinomial draws)."""
        return np.append(self.table, self.tail_mass)

    def describe(self) -> dict:
        return {
            "family": self.family,
            "alpha": self.alpha,
            "sigma2": self.sigma2,
            "mu0": self.mu0,
            **self.params,
        }


def sample_offspring(law: OffspringLaw, rng: np.random.Generator) -> int:
    return int(law.sample(rng, 1)[0])


def geometric(p: float = 0.5, k_max: int = 60) -> OffspringLaw:
    """mu(k) = p (1-p)^k; critical only for p = 1/2."""
    if not 0 < p < 1:
        raise LawError("geometric parameter must lie in (0, 1)")
    q = 1.0 - p
    k = np.arange(k_max + 1)
    table = p * q**k
    tail_mass = q ** (k_max + 1)
    # E[xi; xi > K] = q^(K+1) (K + 1 + q/p)
    tail_mean = tail_mass * (k_max + 1 + q / p)

    def tail(rng, size):
        return k_max + rng.geometric(p, size=size).astype(np.int64)

    def tail_sf(kk):
        return q ** kk

    return OffspringLaw(
        family="geometric",
        table=table,
        alpha=2.0,
        sigma2=q / p**2,
        tail_mass=tail_mass,
        tail_mean=tail_mean,
        tail_sampler=tail,
        tail_sf=tail_sf,
        params={"p": p},
    )


def poisson(lam: float = 1.0, k_max: int = 24) -> OffspringLaw:
    k = np.arange(k_max + 1)
    table = np.exp(-lam + k * math.log(lam) - special.gammaln(k + 1))
    far = np.arange(k_max + 1, k_max + 200)
    far_pmf = np.exp(-lam + far * math.log(lam) - special.gammaln(far + 1))
    tail_mass = float(special.gammainc(k_max + 1, lam))  # P(xi > k_max)
    tail_mean = math.fsum(far * far_pmf)

    def tail(rng, size):
        # inversion on the conditional law of {xi > k_max}
        cdf = np.cumsum(far_pmf) / far_pmf.sum()
        idx = np.searchsorted(cdf, rng.random(size), side="right")
        return far[np.minimum(idx, far.size - 1)]

    def tail_sf(kk):
        return float(special.gammainc(kk, lam)) if kk > 0 else 1.0

    return OffspringLaw(
        family="poisson",
        table=table,
        alpha=2.0,
        sigma2=lam,
        tail_mass=tail_mass,
        tail_mean=tail_mean,
        tail_sampler=tail,
        tail_sf=tail_sf,
        params={"lambda": lam},
    )


def binary() -> OffspringLaw:
    """mu(0) = mu(2) = 1/2.  Periodic: trees have an odd number of vertices."""
    return OffspringLaw(family="binary", table=np.array([0.5, 0.0, 0.5]), alpha=2.0, sigma2=1.0)


def _stable_tail_sampler(alpha: float, k0: int) -> TailSampler:
    """Exact sampler of mu(k) proportional to k^(-1-alpha) on k >= k0.

    Proposal floor(X) with X Pareto(k0, alpha), accepted with probability
    r(k)/r(k0) where r(k) = k^(-1-alpha) / (k^-alpha - (k+1)^-alpha) is
    decreasing in k.
    """

    def ratio(k):
        return k ** (-1.0 - alpha) / (k ** (-alpha) - (k + 1.0) ** (-alpha))

    r0 = ratio(float(k0))

    def sample(rng, size):
        out = np.empty(size, dtype=np.int64)
        filled = 0
        while filled < size:
            m = size - filled
            u = 1.0 - rng.random(m)
            x = k0 * u ** (-1.0 / alpha)
            x = np.minimum(x, 9.0e18)
            k = np.floor(x)
            ok = rng.random(m) * r0 <= ratio(k)
            got = k[ok].astype(np.int64)
            out[filled : filled + got.size] = got
            filled += got.size
        return out

    return sample


def stable_tail(alpha: float, c: Optional[float] = None, k_max: int = 512) -> OffspringLaw:
    """Heavy-tailed critical law with P(xi >= K) ~ c K^-alpha, alpha in (1, 2).

    mu(k) = c alpha k^(-1-alpha) for k >= 2, with mu(0) and mu(1) chosen so
    that the law sums to one with mean one.  ``c`` defaults to 80% of the
    largest admissible value (which would make mu(1) = 0).
    """
    if not 1.0 < alpha < 2.0:
        raise LawError("stable-tail family needs alpha in (1, 2)")
    zeta_a = float(special.zeta(alpha))
    zeta_a1 = float(special.zeta(alpha + 1.0))
    c_max = 1.0 / (alpha * (zeta_a - 1.0))
    if c is None:
        c = 0.8 * c_max
    if not 0 < c <= c_max:
        raise LawError(f"tail constant must lie in (0, {c_max:.6g}] for alpha={alpha}")
    w = c * alpha
    k = np.arange(2, k_max + 1, dtype=np.float64)
    weights = w * k ** (-1.0 - alpha)
    mu1 = 1.0 - w * (zeta_a - 1.0)
    mu0 = w * (zeta_a - zeta_a1)
    table = np.concatenate([[mu0, mu1], weights])
    tail_mass = w * float(special.zeta(alpha + 1.0, k_max + 1))
    tail_mean = w * float(special.zeta(alpha, k_max + 1))
    # the table's own sums carry rounding; absorb it into mu(1), mu(0)
    drift_mean = (math.fsum(np.arange(table.size) * table) + tail_mean) - 1.0
    table[1] -= drift_mean
    table[0] += drift_mean
    drift_mass = math.fsum(table) + tail_mass - 1.0
    table[0] -= drift_mass

    def tail_sf(kk):
        return w * float(special.zeta(alpha + 1.0, kk))

    return OffspringLaw(
        family="stable",
        table=table,
        alpha=alpha,
        sigma2=math.inf,
        tail_mass=tail_mass,
        tail_mean=tail_mean,
        tail_sampler=_stable_tail_sampler(alpha, k_max + 1),
        tail_sf=tail_sf,
        params={"c": c, "k_max": k_max},
    )


def custom(probs, name: str = "custom") -> OffspringLaw:
    """Finite-support law from a table ``probs[k] = mu(k)``."""
    table = np.asarray(probs, dtype=np.float64)
    k = np.arange(table.size)
    var = math.fsum(k * k * table) - 1.0
    return OffspringLaw(family=name, table=table, alpha=2.0, sigma2=var)


def _read_custom_csv(path: Path) -> np.ndarray:
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            a, b = line.split(",")[:2]
            try:
                rows.append((int(a), float(b)))
            except ValueError:
                continue  # header row
    if not rows:
        raise LawError(f"no rows in {path}")
    kmax = max(k for k, _ in rows)
    table = np.zeros(kmax + 1)
    for k, p in rows:
        table[k] += p
    return table


def parse_law(text: str) -> OffspringLaw:
    """Parse ``geometric:0.5``, ``poisson:1``, ``binary``, ``stable:alpha=1.3[,c=..]``
    or ``custom:@file.csv``."""
    head, _, rest = text.strip().partition(":")
    head = head.lower()
    try:
        if head == "geometric":
            return geometric(float(rest) if rest else 0.5)
        if head == "poisson":
            lam = float(rest) if rest else 1.0
            if lam != 1.0:
                raise LawError("only the critical Poisson(1) law is supported")
            return poisson(lam)
        if head == "binary":
            return binary()
        if head == "stable":
            kw = {}
            for part in filter(None, rest.split(",")):
                key, _, val = part.partition("=")
                kw[key.strip()] = float(val)
            if "alpha" not in kw:
                raise LawError("stable law needs alpha=...")
            return stable_tail(kw["alpha"], kw.get("c"))
        if head == "custom":
            if not rest.startswith("@"):
                raise LawError("custom law syntax is custom:@file.csv")
            return custom(_read_custom_csv(Path(rest[1:])))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, LawError):
            raise
        raise LawError(f"cannot parse offspring law {text!r}: {exc}") from exc
    raise LawError(f"unknown offspring law {text!r}")


@dataclass(frozen=True)
class Normalization:
    """The scaling sequence B_n."""

    B: Callable[[int], float]
    mode: str

    def __call__(self, n: int) -> float:
        return float(self.B(n))


def _quantile_B(law: OffspringLaw) -> Callable[[int], float]:
    def B(n: int) -> float:
        # smallest integer b with P(X > b) = P(xi >= b + 2) <= 1/n
        target = 1.0 / n
        lo, hi = 0, 1
        while law.sf(hi + 2) > target:
            lo, hi = hi, hi * 2
        while lo < hi:
            mid = (lo + hi) // 2
            if law.sf(mid + 2) <= target:
                hi = mid
            else:
                lo = mid + 1
        return float(max(lo, 1))

    return B


def normalization_for(
    law: OffspringLaw, mode: Optional[str] = None, B: Optional[Callable[[int], float]] = None
) -> Normalization:
    """B_n for ``law``.

    ``finite-variance-exact`` gives sqrt(n sigma^2 / 2).  ``quantile-calibrated``
    gives inf{b : P(X > b) <= 1/n}; for alpha < 2 this is only correct up to a
    slowly varying constant factor.  ``user-supplied`` wraps ``B``.
    """
    if mode is None:
        mode = "user-supplied" if B is not None else (
            "finite-variance-exact" if math.isfinite(law.sigma2) else "quantile-calibrated"
        )
    if mode == "finite-variance-exact":
        if not math.isfinite(law.sigma2):
            raise LawError("finite-variance-exact normalisation needs sigma^2 < infinity")
        s = law.sigma2
        return Normalization(lambda n: math.sqrt(n * s / 2.0), mode)
    if mode == "quantile-calibrated":
        return Normalization(_quantile_B(law), mode)
    if mode == "user-supplied":
        if B is None:
            raise LawError("user-supplied normalisation needs B")
        return Normalization(B, mode)
    raise LawError(f"unknown normalisation mode {mode!r}")
