from itertools import product

import numpy as np
import pytest

from lexcat.kmeans import kmeans, within_sse


def exhaustive_best_sse(points: np.ndarray, k: int) -> float:
    """Optimal k-means SSE by enumerating every assignment of points."""
    m = points.shape[0]
    best = np.inf
    for assign in product(range(k), repeat=m):
        assign = np.asarray(assign)
        if len(set(assign.tolist())) < k:
            continue
        sse = 0.0
        for j in range(k):
            cluster = points[assign == j]
            sse += float(((cluster - cluster.mean(axis=0)) ** 2).sum())
        best = min(best, sse)
    return best


class TestWithinSse:
    def test_hand_value(self):
        pts = np.array([[0.0], [2.0], [10.0]])
        centers = np.array([[1.0], [10.0]])
        assert within_sse(pts, centers) == pytest.approx(2.0)

    def test_zero_when_centers_are_points(self):
        pts = np.array([[1.0, 2.0], [3.0, 4.0]])
        assert within_sse(pts, pts) == 0.0


class TestKmeans:
    def test_validation(self):
        with pytest.raises(ValueError):
            kmeans(np.zeros((3, 2)), 0, seed=0)
        with pytest.raises(ValueError):
            kmeans(np.zeros((0, 2)), 1, seed=0)

    def test_fewer_points_than_clusters_returns_points(self):
        pts = np.array([[1.0, 0.0], [0.0, 1.0]])
        np.testing.assert_array_equal(kmeans(pts, 5, seed=0), pts)
        np.testing.assert_array_equal(kmeans(pts, 2, seed=0), pts)

    def test_k1_is_mean(self):
        rng = np.random.default_rng(0)
        pts = rng.standard_normal((7, 3))
        out = kmeans(pts, 1, seed=3)
        np.testing.assert_allclose(out, pts.mean(axis=0, keepdims=True), atol=1e-12)

    def test_two_tight_clusters(self):
        rng = np.random.default_rng(1)
        pts = np.vstack([
            rng.normal(0.0, 0.01, size=(10, 2)),
            rng.normal(5.0, 0.01, size=(10, 2)),
        ])
        centers = kmeans(pts, 2, seed=0)
        centers = centers[np.argsort(centers[:, 0])]
        np.testing.assert_allclose(centers[0], [0.0, 0.0], atol=0.02)
        np.testing.assert_allclose(centers[1], [5.0, 5.0], atol=0.02)

    def test_seeded_determinism(self):
        rng = np.random.default_rng(5)
        pts = rng.standard_normal((30, 4))
        a = kmeans(pts, 3, seed=42)
        b = kmeans(pts, 3, seed=42)
        np.testing.assert_array_equal(a, b)

    def test_exhaustive_partition_oracle(self):
        # small instances where brute force over all assignments is feasible
        hits = 0
        total = 50
        rng = np.random.default_rng(2024)
        for trial in range(total):
            m = int(rng.integers(3, 6))  # 3..5 points
            n = int(rng.integers(1, 4))  # 1..3 dims
            pts = rng.standard_normal((m, n))
            got = within_sse(pts, kmeans(pts, 2, seed=trial))
            want = exhaustive_best_sse(pts, 2)
            if got <= want + 1e-6:
                hits += 1
        assert hits >= 48

    def test_empty_cluster_reseeded(self):
        # duplicate points force degenerate inits; result must still have
        # k distinct rows and be optimal for this layout
        pts = np.array([[0.0], [0.0], [0.0], [9.0]])
        centers = kmeans(pts, 2, seed=1)
        assert centers.shape == (2, 1)
        assert within_sse(pts, centers) == pytest.approx(0.0, abs=1e-12)
