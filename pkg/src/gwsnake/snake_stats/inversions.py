import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .. import _kernels as K
from ..spatial_snake import UniformInterval, decorate, decorate_many
from ..tree_codec import PlaneTree, total_path_length


def _as_perm(tree: PlaneTree, perm) -> np.ndarray:
    perm = np.asarray(perm, dtype=np.int64)
    n1 = tree.degrees.size
    if perm.shape != (n1,) or not np.array_equal(np.sort(perm), np.arange(n1)):
        raise ValueError(f"labels must be a permutation of 0..{n1 - 1}")
    return perm


def inversions(tree: PlaneTree, perm) -> int:
    """Number of ancestor/descendant pairs whose labels are out of order."""
    perm = _as_perm(tree, perm)
    return int(K.inversion_count(tree.parent, tree.subtree_size, perm))


def inversions_naive(tree: PlaneTree, perm) -> int:
    """Quadratic double loop over (ancestor, descendant) pairs."""
    perm = _as_perm(tree, perm)
    return int(K.inversion_count_naive(tree.parent, perm))


def expected_inversions(tree: PlaneTree) -> Fraction:
    """E[I] under uniform labels, which is half the number of ancestor pairs."""
    return Fraction(total_path_length(tree), 2)


def exhaustive_mean_inversions(tree: PlaneTree) -> Fraction:
    """Mean of I over all (n+1)! labelings; only sensible for tiny trees."""
    n1 = tree.degrees.size
    if n1 > 9:
        raise ValueError("exhaustive enumeration limited to 9 vertices")
    par, size = tree.parent, tree.subtree_size
    total = 0
    count = 0
    for p in itertools.permutations(range(n1)):
        total += int(K.inversion_count(par, size, np.array(p, dtype=np.int64)))
        count += 1
    return Fraction(total, count)


def shared_ancestry_sum(tree: PlaneTree) -> int:
    """sum over w != root of size(w)^2, i.e. the number of triples (u, v, w)
    with w a common non-root ancestor (inclusive) of u and v."""
    s = tree.subtree_size[1:]
    return int((s * s).sum())


def shared_ancestry_sum_naive(tree: PlaneTree) -> int:
    par = tree.parent
    anc = []
    for v in range(par.size):
        a = set()
        u = v
        while u > 0:
            a.add(u)
            u = par[u]
        anc.append(a)
    return sum(len(anc[u] & anc[v]) for u in range(par.size) for v in range(par.size))


def step_process(tree: PlaneTree, S: np.ndarray) -> np.ndarray:
    """Values of the step process R on [i, i+1), i = 0..2n-1: the position of
    whichever of the two contour vertices visited at times i, i+1 is deeper."""
    cv = tree.contour_vertices
    d = tree.depth[cv]
    deeper = np.where(d[:-1] > d[1:], cv[:-1], cv[1:])
    return np.asarray(S)[deeper]


@dataclass
class CouplingReport:
    inversions: int
    path_length: int
    J: float
    half_integral_R: float
    max_R_minus_C: float
    n: int

    @property
    def gap(self) -> float:
        """|(1/2) int R - (I - Lambda/2)|."""
        return abs(self.half_integral_R - (self.inversions - self.path_length / 2))

    @property
    def within_bound(self) -> bool:
        return self.gap <= 2 * self.n


def coupled_labels(Y: np.ndarray, u_root: float) -> np.ndarray:
    """Labels given by the ranks of U_v = Y_v + 1/2, the root using ``u_root``."""
    U = Y + 0.5
    U[0] = u_root
    return np.argsort(np.argsort(U, kind="stable"), kind="stable").astype(np.int64)


def inversion_coupling_check(tree: PlaneTree, rng: np.random.Generator) -> CouplingReport:
    """Decorate with Uniform(-1/2, 1/2), label vertices by the ranks of Y + 1/2
    and compare I - Lambda/2 with J = sum of positions = (1/2) integral of R."""
    snake = decorate(tree, UniformInterval(-0.5, 0.5), rng, exact=False)
    labels = coupled_labels(snake.Y.copy(), float(rng.random()))
    I = inversions(tree, labels)
    lam = total_path_length(tree)
    Csp = snake.Csp
    R = step_process(tree, snake.S)
    J = math.fsum(snake.S)
    half_int = math.fsum(R) / 2
    # Csp is linear between integer times, so the gap is largest at an endpoint
    gap_R = float(np.abs(np.diff(Csp)).max()) if Csp.size > 1 else 0.0
    return CouplingReport(I, lam, J, half_int, gap_R, tree.n)


@dataclass
class VarianceCheck:
    exact: float
    sample_var: float
    stderr: float
    reps: int

    @property
    def z(self) -> float:
        return (self.sample_var - self.exact) / self.stderr


def variance_of_J_check(tree: PlaneTree, rng: np.random.Generator, reps: int = 1000) -> VarianceCheck:
    """Compare the sample variance of J over re-decorations with
    (1/12) * sum of shared non-root ancestry."""
    law = UniformInterval(-0.5, 0.5)
    _, S = decorate_many(tree, law, rng, reps)
    J = S.sum(axis=1)
    exact = law.variance * shared_ancestry_sum(tree)
    dev2 = (J - J.mean()) ** 2
    sample_var = dev2.sum() / (reps - 1)
    # delta-method standard error of the sample variance
    stderr = dev2.std(ddof=1) / math.sqrt(reps)
    return VarianceCheck(exact, float(sample_var), float(stderr), reps)
