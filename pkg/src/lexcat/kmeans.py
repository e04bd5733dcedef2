"""Seeded k-means with k-means++ initialization and restarts.

Determinism contract: identical (points order, n_clusters, seed) gives
bit-identical centroids regardless of thread schedule.
"""

from __future__ import annotations

import numpy as np

DEFAULT_RESTARTS = 5
DEFAULT_MAX_ITER = 100


def within_sse(points: np.ndarray, centers: np.ndarray) -> float:
    """Sum of squared distances from each point to its nearest center."""
    d2 = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    return float(d2.min(axis=1).sum())


def _kmeanspp_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    m = points.shape[0]
    chosen = [int(rng.integers(m))]
    d2 = ((points - points[chosen[0]]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = float(d2.sum())
        if total > 0.0:
            idx = int(rng.choice(m, p=d2 / total))
        else:
            idx = int(rng.integers(m))
        chosen.append(idx)
        d2 = np.minimum(d2, ((points - points[idx]) ** 2).sum(axis=1))
    return points[chosen].copy()


def _assign(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    d2 = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    return d2.argmin(axis=1)


def _update(points: np.ndarray, centers: np.ndarray, assign: np.ndarray) -> np.ndarray:
    k = centers.shape[0]
    new = centers.copy()
    empties = []
    for j in range(k):
        mask = assign == j
        if mask.any():
            new[j] = points[mask].mean(axis=0)
        else:
            empties.append(j)
    if empties:
        # reseed each empty cluster to the point currently farthest from
        # its assigned center, taking successive farthest points
        dist = ((points - centers[assign]) ** 2).sum(axis=1)
        order = np.argsort(-dist, kind="stable")
        for pos, j in enumerate(empties):
            new[j] = points[order[pos % len(order)]]
    return new


def _lloyd(points: np.ndarray, k: int, rng: np.random.Generator,
           max_iter: int) -> tuple[np.ndarray, float]:
    centers = _kmeanspp_init(points, k, rng)
    assign = _assign(points, centers)
    for _ in range(max_iter):
        centers = _update(points, centers, assign)
        new_assign = _assign(points, centers)
        if (new_assign == assign).all():
            break
        assign = new_assign
    return centers, within_sse(points, centers)


def kmeans(points, n_clusters: int, seed: int, *, restarts: int = DEFAULT_RESTARTS,
           max_iter: int = DEFAULT_MAX_ITER) -> np.ndarray:
    """Cluster points into at most n_clusters centroids.

    When there are no more points than requested clusters, the points
    themselves are returned. Otherwise runs k-means++ plus Lloyd iterations
    to an assignment fixpoint, restarted `restarts` times from derived
    seeds, keeping the lowest within-cluster SSE.
    """
    if n_clusters < 1:
        raise ValueError(f"n_clusters must be >= 1, got {n_clusters}")
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[0] < 1:
        raise ValueError("points must be a non-empty 2-D array")
    m = points.shape[0]
    if m <= n_clusters:
        return points.copy()
    best_centers = None
    best_sse = np.inf
    for child in np.random.SeedSequence(seed).spawn(restarts):
        rng = np.random.default_rng(child)
        centers, sse = _lloyd(points, n_clusters, rng, max_iter)
        if sse < best_sse:
            best_sse = sse
            best_centers = centers
    return best_centers
