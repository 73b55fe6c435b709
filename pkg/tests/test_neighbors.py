import numpy as np
import pytest

from dgcn.errors import EmptyDataset
from dgcn.neighbors import build_index, query


def brute_reference(points, x, k):
    d = np.sqrt(((points - x) ** 2).sum(axis=1))
    order = np.lexsort((np.arange(len(points)), d))
    return order[: min(k, len(points))]


class TestBuildIndex:
    def test_singleton(self):
        idx = build_index(np.array([[1.0, 2.0]]))
        assert idx.n == 1
        np.testing.assert_array_equal(query(idx, [0.0, 0.0], 3), [0])

    def test_empty_rejected(self):
        with pytest.raises(EmptyDataset):
            build_index(np.empty((0, 2)))

    def test_bad_strategy_rejected(self):
        with pytest.raises(ValueError):
            build_index(np.ones((2, 2)), strategy="ann")

    def test_duplicates_keep_distinct_indices(self):
        pts = np.array([[1.0], [1.0], [1.0]])
        idx = build_index(pts)
        np.testing.assert_array_equal(idx.query([1.0], 3), [0, 1, 2])


class TestQuery:
    def test_hand_distances_1d(self):
        idx = build_index(np.array([[0.0], [1.0], [2.0], [10.0]]))
        np.testing.assert_array_equal(idx.query([9.5], 2), [3, 2])

    def test_k_at_least_n_returns_all_sorted(self):
        pts = np.array([[0.0], [5.0], [2.0]])
        idx = build_index(pts)
        np.testing.assert_array_equal(idx.query([0.1], 10), [0, 2, 1])

    def test_equidistant_tie_prefers_lower_index(self):
        pts = np.array([[-1.0], [1.0], [3.0]])
        idx = build_index(pts)
        np.testing.assert_array_equal(idx.query([0.0], 1), [0])
        kd = build_index(pts, strategy="kdtree")
        np.testing.assert_array_equal(kd.query([0.0], 1), [0])

    def test_k_must_be_positive(self):
        idx = build_index(np.ones((3, 1)))
        with pytest.raises(ValueError):
            idx.query([1.0], 0)

    def test_determinism(self):
        rng = np.random.default_rng(0)
        pts = rng.standard_normal((50, 3))
        idx = build_index(pts)
        q = rng.standard_normal(3)
        np.testing.assert_array_equal(idx.query(q, 7), idx.query(q, 7))


class TestStrategyEquivalence:
    def test_brute_vs_kdtree_on_200_points(self):
        rng = np.random.default_rng(5)
        pts = rng.standard_normal((200, 4))
        brute = build_index(pts, "brute")
        tree = build_index(pts, "kdtree")
        for _ in range(50):
            q = rng.standard_normal(4)
            k = int(rng.integers(1, 20))
            np.testing.assert_array_equal(brute.query(q, k), tree.query(q, k))

    def test_thousand_queries_match_reference(self):
        rng = np.random.default_rng(6)
        pts = rng.standard_normal((300, 2))
        # Inject exact duplicates so the tie rule is exercised.
        pts[50] = pts[10]
        pts[200] = pts[10]
        brute = build_index(pts, "brute")
        tree = build_index(pts, "kdtree")
        for i in range(1000):
            if i % 5 == 0:
                q = pts[int(rng.integers(0, 300))]  # on-point queries hit ties
            else:
                q = rng.standard_normal(2)
            k = int(rng.integers(1, 12))
            want = brute_reference(pts, q, k)
            np.testing.assert_array_equal(brute.query(q, k), want)
            np.testing.assert_array_equal(tree.query(q, k), want)
