"""Discrete snakes: i.i.d. edge displacements on a plane tree.

Each non-root vertex ``u`` carries a displacement ``Y_u``; its position is
``S_u = S_parent(u) + Y_u`` with ``S_root = 0``.  Since vertices are stored in
lex order, the spatial height process is ``S`` itself and the spatial contour
process is ``S`` read along the contour walk.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from numba import njit

from . import _kernels as K
from .tree_codec import PlaneTree

__all__ = [
    "DisplacementLaw",
    "Uniform3",
    "UniformInterval",
    "SymmetricPareto",
    "Shifted",
    "RegimePareto",
    "parse_displacement",
    "SpatialSnake",
    "CutoffDecomposition",
    "MomentReport",
    "quantize",
    "decorate",
    "decorate_with",
    "decorate_many",
    "default_cutoff",
    "cutoff",
    "conditional_moment_check",
]


class DisplacementLaw:
    """Base class.  Subclasses set ``mean`` and ``second_moment`` and implement
    ``sample``, ``sf_pos`` (P(Y > y)) and ``sf_neg`` (P(-Y > y))."""

    name = "displacement"
    mean: float = 0.0
    second_moment: float = math.inf

    @property
    def variance(self) -> float:
        return self.second_moment - self.mean**2

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        raise NotImplementedError

    def sf_pos(self, y: float) -> float:
        raise NotImplementedError

    def sf_neg(self, y: float) -> float:
        raise NotImplementedError

    def sf_abs(self, y: float) -> float:
        """P(|Y| > y) for y >= 0."""
        return self.sf_pos(y) + self.sf_neg(y)

    def calibrate(self, n: int, B_n: float, alpha: float) -> "DisplacementLaw":
        """Laws whose definition depends on the tree size override this."""
        return self

    def describe(self) -> dict:
        return {"family": self.name, "mean": self.mean, "second_moment": self.second_moment}


class Uniform3(DisplacementLaw):
    name = "uniform3"
    mean = 0.0
    second_moment = 2.0 / 3.0

    def sample(self, rng, size):
        return rng.integers(-1, 2, size=size).astype(np.float64)

    def sf_pos(self, y):
        return 1 / 3 if y < 1 else 0.0

    sf_neg = sf_pos


@dataclass(frozen=True)
class UniformInterval(DisplacementLaw):
    a: float = -0.5
    b: float = 0.5
    name = "uniform-interval"

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError("need a < b")

    @property
    def mean(self):
        return (self.a + self.b) / 2

    @property
    def second_moment(self):
        return (self.a**2 + self.a * self.b + self.b**2) / 3

    def sample(self, rng, size):
        return rng.uniform(self.a, self.b, size=size)

    def sf_pos(self, y):
        return float(np.clip((self.b - y) / (self.b - self.a), 0.0, 1.0))

    def sf_neg(self, y):
        return float(np.clip((-y - self.a) / (self.b - self.a), 0.0, 1.0))

    def describe(self):
        return {**super().describe(), "a": self.a, "b": self.b}


@dataclass(frozen=True)
class SymmetricPareto(DisplacementLaw):
    """P(Y > y) = P(-Y > y) = (1 + y)^-beta / 2 for y >= 0."""

    beta: float
    name = "symmetric-pareto"

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError("beta must be positive")

    mean = 0.0

    @property
    def second_moment(self):
        b = self.beta
        return 2.0 / ((b - 1) * (b - 2)) if b > 2 else math.inf

    def sample(self, rng, size):
        u = 1.0 - rng.random(size)
        mag = u ** (-1.0 / self.beta) - 1.0
        sign = np.where(rng.random(size) < 0.5, -1.0, 1.0)
        return sign * mag

    def sf_pos(self, y):
        return 0.5 * (1.0 + max(y, 0.0)) ** (-self.beta)

    sf_neg = sf_pos

    def describe(self):
        return {**super().describe(), "beta": self.beta}


@dataclass(frozen=True)
class Shifted(DisplacementLaw):
    base: DisplacementLaw
    m: float
    name = "shifted"

    @property
    def mean(self):
        return self.base.mean + self.m

    @property
    def second_moment(self):
        return self.base.variance + self.mean**2

    def sample(self, rng, size):
        return self.base.sample(rng, size) + self.m

    def sf_pos(self, y):
        return self.base.sf_pos(y - self.m)

    def sf_neg(self, y):
        return self.base.sf_neg(y + self.m)

    def calibrate(self, n, B_n, alpha):
        return Shifted(self.base.calibrate(n, B_n, alpha), self.m)

    def describe(self):
        return {**super().describe(), "m": self.m, "base": self.base.describe()}


@dataclass(frozen=True)
class RegimePareto(DisplacementLaw):
    """Two-sided Pareto law tuned so that n P(+-Y >= t_n) = a_+- with
    t_n = (n / B_n)^(1/p), at the simulated n.

    The tail index is ``kappa = p alpha / (alpha - 1)``, so that
    n P(Y > y t_n) = a_+ y^-kappa for y >= 1.  With probability rho_+ the
    law is ``s_+ X`` and otherwise ``-s_- X'`` where X, X' are Pareto(kappa)
    on [1, inf).  For kappa > 1 the side weights are chosen to make the mean
    zero; a side with a = 0 becomes a point mass that restores the centring.
    Until :meth:`calibrate` is called the scales are unset.
    """

    p: float
    a_plus: float = 1.0
    a_minus: float = 1.0
    n: Optional[int] = None
    t_n: Optional[float] = None
    alpha: Optional[float] = None
    name = "regime-pareto"

    def __post_init__(self):
        if self.p <= 0 or self.a_plus < 0 or self.a_minus < 0 or self.a_plus + self.a_minus <= 0:
            raise ValueError("need p > 0, a_+- >= 0 and a_+ + a_- > 0")

    def calibrate(self, n, B_n, alpha):
        return RegimePareto(self.p, self.a_plus, self.a_minus, n=int(n), t_n=(n / B_n) ** (1 / self.p), alpha=alpha)

    @property
    def kappa(self) -> float:
        self._need()
        return self.p * self.alpha / (self.alpha - 1.0)

    def _need(self):
        if self.t_n is None:
            raise RuntimeError("RegimePareto must be calibrated to (n, B_n, alpha) first")

    @property
    def _sides(self):
        """(rho_plus, s_plus, rho_minus, s_minus, atom) where ``atom`` is the
        point-mass value used by a side with a = 0 (or None)."""
        self._need()
        k, n, t = self.kappa, self.n, self.t_n
        ap, am = self.a_plus, self.a_minus

        def scale(a, rho):
            return t * (a / (n * rho)) ** (1 / k)

        if k <= 1:
            rp = ap / (ap + am)
            return rp, scale(ap, rp) if ap else 0.0, 1 - rp, scale(am, 1 - rp) if am else 0.0, None
        if ap > 0 and am > 0:
            ratio = (am / ap) ** (1 / (k - 1))  # rho_+ / rho_-
            rp = ratio / (1 + ratio)
            return rp, scale(ap, rp), 1 - rp, scale(am, 1 - rp), None
        # one-sided tail: heavy side with weight 1/2, the other an atom
        heavy = scale(ap or am, 0.5)
        atom = heavy * k / (k - 1)
        if ap > 0:
            return 0.5, heavy, 0.5, 0.0, -atom
        return 0.5, 0.0, 0.5, heavy, atom

    @property
    def mean(self):
        if self.t_n is None:
            return 0.0
        rp, sp, rm, sm, atom = self._sides
        k = self.kappa
        if k <= 1:
            return math.nan
        m = rp * sp * k / (k - 1) * (sp > 0) - rm * sm * k / (k - 1) * (sm > 0)
        if atom is not None:
            m += 0.5 * atom
        return m

    @property
    def second_moment(self):
        if self.t_n is None:
            return math.nan
        rp, sp, rm, sm, atom = self._sides
        k = self.kappa
        if k <= 2:
            return math.inf
        out = (rp * sp**2 + rm * sm**2) * k / (k - 2)
        if atom is not None:
            out += 0.5 * atom**2
        return out

    def sample(self, rng, size):
        rp, sp, rm, sm, atom = self._sides
        k = self.kappa
        u = 1.0 - rng.random(size)
        mag = u ** (-1.0 / k)
        plus = rng.random(size) < rp
        pos = sp * mag if not (atom is not None and atom > 0) else np.full_like(mag, atom)
        neg = -sm * mag if not (atom is not None and atom < 0) else np.full_like(mag, atom)
        return np.where(plus, pos, neg)

    def _side_sf(self, rho, s, y, atom_here):
        if atom_here is not None:
            return 0.5 if y < atom_here else 0.0
        if s == 0:
            return 0.0
        k = self.kappa
        return rho if y < s else rho * (y / s) ** (-k)

    def sf_pos(self, y):
        rp, sp, rm, sm, atom = self._sides
        return self._side_sf(rp, sp, y, atom if (atom is not None and atom > 0) else None)

    def sf_neg(self, y):
        rp, sp, rm, sm, atom = self._sides
        return self._side_sf(rm, sm, y, -atom if (atom is not None and atom < 0) else None)

    def describe(self):
        d = {"family": self.name, "p": self.p, "a_plus": self.a_plus, "a_minus": self.a_minus}
        if self.t_n is not None:
            d.update(n=self.n, t_n=self.t_n, kappa=self.kappa, mean=self.mean, second_moment=self.second_moment)
        return d


def parse_displacement(text: str) -> DisplacementLaw:
    """``uniform3``, ``uniform:a,b``, ``pareto:beta``, ``regime:p=2[,a+=1,a-=1]``,
    ``shifted:m:<law>``."""
    head, _, rest = text.strip().partition(":")
    head = head.lower()
    try:
        if head == "uniform3":
            return Uniform3()
        if head == "uniform":
            a, b = (float(x) for x in rest.split(",")) if rest else (-0.5, 0.5)
            return UniformInterval(a, b)
        if head == "pareto":
            return SymmetricPareto(float(rest.replace("beta=", "")))
        if head == "regime":
            kw = {}
            for part in filter(None, rest.split(",")):
                key, _, val = part.partition("=")
                kw[key.strip()] = float(val)
            return RegimePareto(kw.pop("p"), kw.pop("a+", 1.0), kw.pop("a-", 1.0))
        if head == "shifted":
            m, _, base = rest.partition(":")
            return Shifted(parse_displacement(base or "uniform3"), float(m))
    except (KeyError, ValueError) as exc:
        raise ValueError(f"cannot parse displacement law {text!r}: {exc}") from exc
    raise ValueError(f"unknown displacement law {text!r}")


def quantize(Y: np.ndarray, max_depth_sum: Optional[float] = None) -> np.ndarray:
    """Round ``Y`` to the coarsest dyadic grid 2^-k such that every sum of a
    subset of the entries is exactly representable in float64.

    With this, positions built from any split of the displacements add up
    exactly.  For integer-valued laws the grid is the integers or finer and
    nothing changes.
    """
    total = float(np.abs(Y).sum()) if max_depth_sum is None else max_depth_sum
    if total == 0:
        return Y.copy()
    if not math.isfinite(total):
        raise OverflowError("displacements too large to quantise")
    k = 52 - math.frexp(total)[1] - 1
    return np.ldexp(np.round(np.ldexp(Y, k)), -k)


@dataclass(frozen=True, eq=False)
class SpatialSnake:
    tree: PlaneTree
    Y: np.ndarray
    S: np.ndarray

    @property
    def n(self):
        return self.tree.n

    @property
    def Hsp(self) -> np.ndarray:
        return self.S

    @property
    def Csp(self) -> np.ndarray:
        return self.S[self.tree.contour_vertices]


def decorate_with(tree: PlaneTree, Y: np.ndarray) -> SpatialSnake:
    """Snake with the given displacements (``Y[0]`` is ignored and set to 0)."""
    Y = np.array(Y, dtype=np.float64)
    if Y.shape != (tree.degrees.size,):
        raise ValueError("need one displacement per vertex")
    Y[0] = 0.0
    return SpatialSnake(tree, Y, K.positions(tree.parent, Y))


def decorate(tree: PlaneTree, law: DisplacementLaw, rng: np.random.Generator, exact: bool = True) -> SpatialSnake:
    """Draw i.i.d. displacements and compute positions.

    ``exact`` rounds the displacements with :func:`quantize` so that cut-off
    splits are exact identities.
    """
    Y = law.sample(rng, tree.degrees.size)
    Y[0] = 0.0
    if exact:
        Y = quantize(Y)
    return SpatialSnake(tree, Y, K.positions(tree.parent, Y))


@njit(cache=True)
def _positions_many(par, Y):
    S = np.empty_like(Y)
    S[:, 0] = 0.0
    for i in range(1, par.size):
        p = par[i]
        for r in range(Y.shape[0]):
            S[r, i] = S[r, p] + Y[r, i]
    return S


def decorate_many(tree: PlaneTree, law: DisplacementLaw, rng: np.random.Generator, reps: int):
    """(Y, S) arrays of shape (reps, n+1) for independent re-decorations of one tree."""
    Y = law.sample(rng, (reps, tree.degrees.size))
    Y[:, 0] = 0.0
    return Y, _positions_many(tree.parent, np.ascontiguousarray(Y))


def default_cutoff(n: int, B_n: float, alpha: float, p: float = 2.0, eps: float = 0.01) -> float:
    """b_n = (n^2 / B_n)^((alpha - 1) / (2 p alpha) + eps)."""
    return (n * n / B_n) ** ((alpha - 1) / (2 * p * alpha) + eps)


@dataclass(frozen=True, eq=False)
class CutoffDecomposition:
    threshold: float
    Y_small: np.ndarray
    Y_big: np.ndarray
    Hsp_small: np.ndarray
    Hsp_big: np.ndarray
    E_n: bool

    @property
    def n_big(self) -> int:
        return int(np.count_nonzero(self.Y_big))


def cutoff(snake: SpatialSnake, b_n: float) -> CutoffDecomposition:
    """Split displacements at |Y| <= b_n.  ``E_n`` flags two big jumps on one
    ancestral line."""
    if not b_n > 0:
        raise ValueError("threshold must be positive")
    big = np.abs(snake.Y) > b_n
    big[0] = False
    Yb = np.where(big, snake.Y, 0.0)
    Ys = np.where(big, 0.0, snake.Y)
    par = snake.tree.parent
    return CutoffDecomposition(
        threshold=float(b_n),
        Y_small=Ys,
        Y_big=Yb,
        Hsp_small=K.positions(par, Ys),
        Hsp_big=K.positions(par, Yb),
        E_n=bool(K.has_stacked_big(par, big)),
    )


@dataclass
class MomentReport:
    probes: np.ndarray
    heights: np.ndarray
    reps: int
    mean: np.ndarray  # sample mean of Hsp(j)
    mean_z: np.ndarray  # z-score of mean against m H(j)
    var_ratio: np.ndarray  # sample mean of (Hsp(j) - m H(j))^2 / (var H(j))
    var_z: np.ndarray
    params: dict = field(default_factory=dict)

    @property
    def max_abs_z(self) -> float:
        return float(max(np.abs(self.mean_z).max(), np.abs(self.var_z).max()))


def conditional_moment_check(
    tree: PlaneTree,
    law: DisplacementLaw,
    rng: np.random.Generator,
    reps: int = 10_000,
    probes: Optional[Sequence[int]] = None,
) -> MomentReport:
    """Monte Carlo check of E[Hsp(j) | T] = m H(j) and Var[Hsp(j) | T] = var(Y) H(j)."""
    H = tree.depth
    if probes is None:
        nz = np.flatnonzero(H > 0)
        probes = nz[np.linspace(0, nz.size - 1, min(5, nz.size)).astype(int)]
    probes = np.asarray(probes, dtype=np.int64)
    _, S = decorate_many(tree, law, rng, reps)
    X = S[:, probes]
    h = H[probes].astype(np.float64)
    m, v = law.mean, law.variance
    mean = X.mean(axis=0)
    mean_z = (mean - m * h) / np.sqrt(v * h / reps)
    R = (X - m * h) ** 2 / (v * h)
    var_ratio = R.mean(axis=0)
    var_z = (var_ratio - 1.0) / (R.std(axis=0, ddof=1) / math.sqrt(reps))
    return MomentReport(probes, H[probes], reps, mean, mean_z, var_ratio, var_z, law.describe())
