import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .. import _kernels as K
from ..tree_codec import PlaneTree


@dataclass
class BranchReport:
    window: int
    threshold: float
    max_fraction: float
    n: int

    @property
    def violated(self) -> bool:
        return self.max_fraction > self.threshold


def branch_window(n: int, C_const: float) -> int:
    """Smallest integer length exceeding C ln n."""
    return int(math.floor(C_const * math.log(max(n, 2)))) + 1


def branch_composition(tree: PlaneTree, mu0: float, C_const: Optional[float] = None) -> BranchReport:
    """Largest fraction of first children among the last L vertices of any
    root-to-vertex path, L the smallest integer above C ln n with
    C = 10 / mu0^2 by default.  Violation means fraction > 1 - mu0 / 2."""
    if C_const is None:
        C_const = 10.0 / mu0**2
    L = branch_window(tree.n, C_const)
    frac = K.max_first_child_fraction(tree.parent, tree.child_rank, L)
    return BranchReport(L, 1.0 - mu0 / 2, float(frac), tree.n)


def branch_composition_exact(tree: PlaneTree, mu0: float, C_const: Optional[float] = None) -> BranchReport:
    """Quadratic check over every ancestral segment ]u, v] longer than C ln n."""
    if C_const is None:
        C_const = 10.0 / mu0**2
    n = tree.n
    bound = C_const * math.log(max(n, 2))
    par, first = tree.parent, tree.child_rank == 0
    best = 0.0
    for v in range(1, par.size):
        length = 0
        firsts = 0
        w = v
        while w > 0:
            length += 1
            firsts += bool(first[w])
            w = par[w]
            if length > bound:
                best = max(best, firsts / length)
    return BranchReport(branch_window(n, C_const), 1.0 - mu0 / 2, best, n)


def uniform_vertex_progeny(tree: PlaneTree, rng: np.random.Generator) -> float:
    """Subtree size of a uniform vertex over n (1 for the one-vertex tree)."""
    if tree.n == 0:
        return 1.0
    v = int(rng.integers(0, tree.degrees.size))
    return tree.subtree_size[v] / tree.n
