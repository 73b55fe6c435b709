"""Exact nearest-neighbor lookup over standardized training inputs.

Both strategies return identical results: the k smallest Euclidean
distances, ascending, with ties broken by ascending point index.  The
kd-tree path exists purely as a speedup for large training sets; it
re-ranks candidate points with the same arithmetic the brute-force path
uses, so the tie rule holds there too.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

from .errors import EmptyDataset

STRATEGIES = ("brute", "kdtree")


class NeighborIndex:
    """Immutable index over a fixed point set; safe for concurrent queries."""

    def __init__(self, points, strategy: str = "brute"):
        points = np.ascontiguousarray(points, dtype=np.float64)
        if points.ndim != 2 or points.shape[0] == 0:
            raise EmptyDataset("neighbor index needs at least one point")
        if strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}")
        self.points = points
        self.strategy = strategy
        self._tree = cKDTree(points) if strategy == "kdtree" else None

    @property
    def n(self) -> int:
        return self.points.shape[0]

    def query(self, x_star, k: int) -> np.ndarray:
        """Indices of the min(k, N) nearest points, by (distance, index)."""
        if k < 1:
            raise ValueError("k must be >= 1")
        x_star = np.asarray(x_star, dtype=np.float64).reshape(-1)
        k = min(k, self.n)
        if self._tree is None:
            return self._rank(np.arange(self.n), x_star, k)
        dd, _ = self._tree.query(x_star, k=k)
        radius = float(np.max(dd))
        # Tiny inflation so candidates on the radius are never lost to
        # last-ulp disagreement between tree and numpy distance sums.
        candidates = self._tree.query_ball_point(
            x_star, radius * (1.0 + 1e-12) + 1e-300
        )
        return self._rank(np.asarray(candidates, dtype=np.intp), x_star, k)

    def _rank(self, candidates, x_star, k):
        diffs = self.points[candidates] - x_star
        dist = np.sqrt(np.einsum("ij,ij->i", diffs, diffs))
        order = np.lexsort((candidates, dist))
        return candidates[order[:k]]


def build_index(points, strategy: str = "brute") -> NeighborIndex:
    return NeighborIndex(points, strategy=strategy)


def query(index: NeighborIndex, x_star, k: int) -> np.ndarray:
    return index.query(x_star, k)
