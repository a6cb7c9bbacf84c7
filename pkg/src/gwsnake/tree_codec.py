"""Plane trees stored as depth-first degree sequences, and their encodings.

For a tree with ``n + 1`` vertices listed in lexicographic (depth-first) order:

* ``W`` (length ``n + 2``) is the Lukasiewicz path, ``W[j+1] = W[j] + deg[j] - 1``;
* ``H`` (length ``n + 1``) is the height process, ``H[j]`` the depth of vertex ``j``;
* ``C`` (length ``2n + 1``) is the contour process.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from . import _kernels as K

__all__ = [
    "PlaneTree",
    "EncodedPaths",
    "InvalidTree",
    "lukasiewicz",
    "height",
    "height_via_records",
    "contour",
    "encode",
    "decode",
    "mirror",
    "total_path_length",
    "path_length_from_contour",
    "ancestor_pairs",
    "chain",
    "star",
]


class InvalidTree(ValueError):
    pass


def _check_degrees(deg: np.ndarray) -> None:
    if deg.ndim != 1 or deg.size == 0:
        raise InvalidTree("degree sequence must be a non-empty vector")
    if deg.min() < 0:
        raise InvalidTree("negative degree")
    walk = np.cumsum(deg - 1)
    if walk[-1] != -1 or (walk.size > 1 and walk[:-1].min() < 0):
        raise InvalidTree("degrees do not describe a single plane tree")


@dataclass(frozen=True, eq=False)
class PlaneTree:
    """A plane tree as its depth-first degree sequence; derived arrays are cached."""

    degrees: np.ndarray

    def __post_init__(self):
        deg = np.ascontiguousarray(self.degrees, dtype=np.int64)
        _check_degrees(deg)
        deg.setflags(write=False)
        object.__setattr__(self, "degrees", deg)

    @classmethod
    def trusted(cls, degrees: np.ndarray) -> "PlaneTree":
        """Wrap a degree array already known to be valid (skips the O(n) check)."""
        obj = object.__new__(cls)
        deg = np.ascontiguousarray(degrees, dtype=np.int64)
        deg.setflags(write=False)
        object.__setattr__(obj, "degrees", deg)
        return obj

    @property
    def n(self) -> int:
        """Number of edges; the tree has ``n + 1`` vertices."""
        return self.degrees.size - 1

    def __len__(self):
        return self.degrees.size

    def __eq__(self, other):
        return isinstance(other, PlaneTree) and np.array_equal(self.degrees, other.degrees)

    def __hash__(self):
        return hash(self.degrees.tobytes())

    def __repr__(self):
        head = ",".join(map(str, self.degrees[:12]))
        tail = ",..." if self.degrees.size > 12 else ""
        return f"PlaneTree(n={self.n}, degrees=[{head}{tail}])"

    @cached_property
    def parent(self) -> np.ndarray:
        """Parent lex index of each vertex; ``-1`` for the root."""
        return K.parents(self.degrees)

    @cached_property
    def depth(self) -> np.ndarray:
        return K.depths(self.parent)

    @cached_property
    def subtree_size(self) -> np.ndarray:
        return K.subtree_sizes(self.parent)

    @cached_property
    def child_rank(self) -> np.ndarray:
        return K.child_rank(self.parent)

    @cached_property
    def contour_vertices(self) -> np.ndarray:
        return K.contour_vertices(self.parent)

    @cached_property
    def first_visit(self) -> np.ndarray:
        """Contour time of the first visit to each vertex."""
        cv = self.contour_vertices
        first = np.full(self.degrees.size, -1, np.int64)
        # later writes win, so write in reverse to keep the earliest time
        first[cv[::-1]] = np.arange(cv.size - 1, -1, -1)
        return first


class EncodedPaths(NamedTuple):
    W: np.ndarray
    H: np.ndarray
    C: np.ndarray


def lukasiewicz(tree: PlaneTree) -> np.ndarray:
    W = np.zeros(tree.degrees.size + 1, np.int64)
    np.cumsum(tree.degrees - 1, out=W[1:])
    return W


def height(tree: PlaneTree) -> np.ndarray:
    return tree.depth.copy()


def height_via_records(W) -> np.ndarray:
    """``H[j] = #{k < j : W[k] <= min W[k+1..j]}``.  Quadratic; for testing."""
    return K.height_via_records(np.asarray(W, dtype=np.int64))


def contour(tree: PlaneTree) -> np.ndarray:
    return tree.depth[tree.contour_vertices]


def encode(tree: PlaneTree) -> EncodedPaths:
    return EncodedPaths(lukasiewicz(tree), height(tree), contour(tree))


def decode(W) -> PlaneTree:
    """Inverse of :func:`lukasiewicz`."""
    W = np.asarray(W, dtype=np.int64)
    if W.size < 2 or W[0] != 0:
        raise InvalidTree("a Lukasiewicz path starts at 0 and has at least one step")
    return PlaneTree(np.diff(W) + 1)


def mirror(tree: PlaneTree) -> PlaneTree:
    """Reverse the order of children at every vertex."""
    return PlaneTree.trusted(K.mirror_degrees(tree.degrees, tree.parent))


def total_path_length(tree: PlaneTree) -> int:
    return int(tree.depth.sum())


def path_length_from_contour(C) -> int:
    """Total path length recovered from the contour as ``n/2 + (1/2) * integral of C``.

    The integral of the piecewise linear contour is the trapezoid sum, so
    ``4 * Lambda = 2n + 2 * sum(C[1:-1]) + C[0] + C[-1]`` in integers.
    """
    C = np.asarray(C, dtype=np.int64)
    n = (C.size - 1) // 2
    four = 2 * n + 2 * int(C[1:-1].sum()) + int(C[0]) + int(C[-1])
    if four % 4:
        raise InvalidTree("not a contour sequence")
    return four // 4


def ancestor_pairs(tree: PlaneTree) -> int:
    """Number of (strict ancestor, descendant) pairs, counted from subtree sizes."""
    return int((tree.subtree_size - 1).sum())


def chain(n_vertices: int) -> PlaneTree:
    deg = np.ones(n_vertices, np.int64)
    deg[-1] = 0
    return PlaneTree(deg)


def star(n_vertices: int) -> PlaneTree:
    deg = np.zeros(n_vertices, np.int64)
    deg[0] = n_vertices - 1
    return PlaneTree(deg)
