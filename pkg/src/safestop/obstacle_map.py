"""Point-cloud obstacle map with exact nearest-neighbor queries.

The spatial index is a KD-tree; query results are guaranteed identical to a
brute-force linear scan, with distance ties broken by insertion order.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree


class ObstacleMap:
    """Immutable point-cloud map. Build once, query concurrently."""

    def __init__(self, points: Sequence[np.ndarray] | np.ndarray):
        pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
        bad = np.nonzero(~np.isfinite(pts).all(axis=1))[0]
        if bad.size:
            raise ValueError(f"non-finite coordinate at point index {int(bad[0])}")
        self._points = pts
        self._points.setflags(write=False)
        self._tree = cKDTree(pts) if len(pts) else None

    @property
    def points(self) -> np.ndarray:
        return self._points

    @property
    def point_count(self) -> int:
        return len(self._points)

    def k_nearest_indices(
        self, query: np.ndarray, k: int, radius: float
    ) -> tuple[np.ndarray, np.ndarray]:
        """Indices and distances of up to k points within radius.

        Sorted ascending by distance, ties by insertion order.
        """
        if k < 1:
            raise ValueError("k must be >= 1")
        if radius <= 0:
            raise ValueError("radius must be positive")
        if self._tree is None:
            return np.empty(0, dtype=np.intp), np.empty(0)
        query = np.asarray(query, dtype=np.float64)
        n = self.point_count
        kk = min(n, k + 8)
        while True:
            dist, idx = self._tree.query(query, k=kk, distance_upper_bound=radius)
            dist, idx = np.atleast_1d(dist), np.atleast_1d(idx)
            valid = idx < n
            idx = idx[valid]
            # recompute so ordering matches the brute-force arithmetic exactly
            dist = np.linalg.norm(self._points[idx] - query, axis=1)
            order = np.lexsort((idx, dist))
            idx, dist = idx[order], dist[order]
            inside = dist <= radius
            idx, dist = idx[inside], dist[inside]
            if len(idx) <= k:
                return idx, dist
            # expand if distance ties straddle the k-cutoff, else truncate
            if dist[k - 1] != dist[k] or kk >= n:
                return idx[:k], dist[:k]
            kk = min(n, kk * 2)

    def k_nearest(
        self, query: np.ndarray, k: int, radius: float
    ) -> list[tuple[np.ndarray, float]]:
        idx, dist = self.k_nearest_indices(query, k, radius)
        return [(self._points[i].copy(), float(d)) for i, d in zip(idx, dist)]

    def nearest_distance(self, query: np.ndarray) -> float:
        """Exact minimal Euclidean distance; +inf for an empty map."""
        if self._tree is None:
            return float("inf")
        d, _ = self._tree.query(np.asarray(query, dtype=np.float64), k=1)
        return float(d)

    def nearest_distances(self, queries: np.ndarray) -> np.ndarray:
        """Vectorized nearest_distance over an (N, 3) array of queries."""
        queries = np.asarray(queries, dtype=np.float64).reshape(-1, 3)
        if self._tree is None:
            return np.full(len(queries), np.inf)
        d, _ = self._tree.query(queries, k=1)
        return np.asarray(d, dtype=np.float64)


def build_map(points: Sequence[np.ndarray] | np.ndarray) -> ObstacleMap:
    return ObstacleMap(points)


def load_point_cloud(path: str) -> np.ndarray:
    """Read an `x y z` per-line point-cloud file (meters, # comments)."""
    rows = []
    with open(path) as f:
        for lineno, line in enumerate(f, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected 3 values, got {len(parts)}")
            rows.append([float(p) for p in parts])
    return np.array(rows, dtype=np.float64).reshape(-1, 3)


def save_point_cloud(path: str, points: np.ndarray) -> None:
    with open(path, "w") as f:
        for p in np.asarray(points).reshape(-1, 3):
            f.write(f"{p[0]:.6f} {p[1]:.6f} {p[2]:.6f}\n")
