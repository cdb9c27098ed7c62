import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from billmap.errors import ArgumentError
from billmap.metrics import (
    alignment_report,
    hull_area_2d,
    neighborhood_purity,
    training_nn_distance,
    trustworthiness,
)
from billmap.oracles import direct_trustworthiness


def random_rotation(rng, d=2):
    M = rng.normal(size=(d, d))
    Q, _ = np.linalg.qr(M)
    return Q


class TestTrustworthiness:
    def test_identity_embedding_is_perfect(self, rng):
        X = rng.normal(size=(40, 2))
        assert trustworthiness(X, X.copy(), k=5) == 1.0

    def test_first_two_coordinates_copy(self, rng):
        X = rng.normal(size=(30, 2))
        coords = X[:, :2].copy()
        assert trustworthiness(X, coords, k=4) == 1.0

    def test_two_points_k1(self):
        X = np.array([[0.0, 0.0], [1.0, 1.0]])
        assert trustworthiness(X, X[::-1].copy(), k=1) == 1.0

    def test_matches_direct_definition_oracle(self, rng):
        X = rng.normal(size=(100, 5))
        coords = rng.permutation(X[:, :2].copy())
        mine = trustworthiness(X, coords, k=7)
        oracle = direct_trustworthiness(X, coords, k=7)
        assert abs(mine - oracle) < 1e-9

    def test_k_too_large_rejected(self, rng):
        X = rng.normal(size=(10, 3))
        with pytest.raises(ArgumentError):
            trustworthiness(X, X.copy(), k=10)

    def test_rotation_translation_invariant(self, rng):
        X = rng.normal(size=(50, 4))
        coords = rng.normal(size=(50, 2))
        moved = coords @ random_rotation(rng).T + np.array([3.0, -7.0])
        a = trustworthiness(X, coords, k=6)
        b = trustworthiness(X, moved, k=6)
        assert abs(a - b) < 1e-9


class TestNeighborhoodPurity:
    def test_perfectly_separated_groups(self):
        rng = np.random.default_rng(0)
        a = rng.normal(loc=0.0, scale=0.5, size=(20, 2))
        b = rng.normal(loc=100.0, scale=0.5, size=(20, 2))
        coords = np.vstack([a, b])
        labels = np.array([0] * 20 + [1] * 20)
        assert neighborhood_purity(coords, labels, k=3) == 1.0

    def test_random_labels_near_half(self):
        rng = np.random.default_rng(1)
        coords = rng.normal(size=(400, 2))
        labels = rng.integers(0, 2, size=400)
        p = neighborhood_purity(coords, labels, k=10)
        assert abs(p - 0.5) < 0.05

    def test_k1_same_labeled_nearest(self):
        coords = np.array([[0.0, 0.0], [0.1, 0.0], [5.0, 5.0], [5.1, 5.0]])
        labels = np.array(["a", "a", "b", "b"])
        assert neighborhood_purity(coords, labels, k=1) == 1.0

    def test_rotation_invariant(self, rng):
        coords = rng.normal(size=(60, 2))
        labels = rng.integers(0, 3, size=60)
        moved = coords @ random_rotation(rng).T + 11.0
        a = neighborhood_purity(coords, labels, k=5)
        b = neighborhood_purity(moved, labels, k=5)
        assert abs(a - b) < 1e-9


class TestHullArea:
    def test_unit_square(self):
        pts = np.array([[0, 0], [1, 0], [1, 1], [0, 1], [0.5, 0.5]], dtype=float)
        assert abs(hull_area_2d(pts) - 1.0) < 1e-12

    def test_degenerate_sets(self):
        assert hull_area_2d(np.array([[1.0, 2.0]])) == 0.0
        assert hull_area_2d(np.array([[0.0, 0.0], [1.0, 1.0]])) == 0.0
        collinear = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]])
        assert hull_area_2d(collinear) == 0.0

    def test_rotation_invariant(self, rng):
        pts = rng.normal(size=(30, 2))
        Q = random_rotation(rng)
        assert abs(hull_area_2d(pts) - hull_area_2d(pts @ Q.T)) < 1e-9


class _FakeProjection:
    def __init__(self, coords, nearest, parties):
        from billmap.records import Party

        self.coords = coords
        self.nearest_train_dist = nearest
        self.party_labels = [Party(p) for p in parties]

    @property
    def n_rows(self):
        return self.coords.shape[0]


class _FakeModel:
    def __init__(self, embedding):
        self.embedding = embedding


class TestAlignmentReport:
    def make_pair(self, rng, m=25):
        train = rng.normal(size=(50, 2)) * 3.0
        proj_coords = train[:m] + rng.normal(0, 0.05, size=(m, 2))
        nearest = np.linalg.norm(proj_coords - train[:m], axis=1)
        parties = ["Democrat"] * (m // 2) + ["Republican"] * (m - m // 2)
        return _FakeModel(train), _FakeProjection(proj_coords, nearest, parties)

    def test_report_fields(self, rng):
        model, proj = self.make_pair(rng)
        report = alignment_report(model, proj)
        assert report.mean_nearest >= 0
        assert report.train_nn_baseline > 0
        assert np.isfinite(report.overlap_ratio)
        assert set(report.per_party) == {"Democrat", "Republican"}
        assert "overlap ratio" in report.to_text()

    def test_identical_points_give_zero_overlap(self, rng):
        train = rng.normal(size=(30, 2))
        proj = _FakeProjection(
            train[:10].copy(), np.zeros(10), ["Democrat"] * 10
        )
        report = alignment_report(_FakeModel(train), proj)
        assert report.overlap_ratio == 0.0

    def test_concentrated_projection_has_tiny_area(self, rng):
        train = rng.normal(size=(30, 2)) * 5.0
        pt = train[3]
        proj = _FakeProjection(
            np.tile(pt, (12, 1)), np.zeros(12), ["Democrat"] * 12
        )
        report = alignment_report(_FakeModel(train), proj)
        assert report.occupied_area_ratio < 1e-9

    def test_empty_projection_rejected(self, rng):
        train = rng.normal(size=(10, 2))
        proj = _FakeProjection(np.zeros((0, 2)), np.zeros(0), [])
        with pytest.raises(ArgumentError):
            alignment_report(_FakeModel(train), proj)

    def test_rotation_invariance_of_report(self, rng):
        model, proj = self.make_pair(rng)
        a = alignment_report(model, proj)
        Q = random_rotation(rng)
        shift = np.array([5.0, -2.0])
        model_r = _FakeModel(model.embedding @ Q.T + shift)
        proj_r = _FakeProjection(
            proj.coords @ Q.T + shift,
            proj.nearest_train_dist,
            [p.value for p in proj.party_labels],
        )
        b = alignment_report(model_r, proj_r)
        assert abs(a.overlap_ratio - b.overlap_ratio) < 1e-9
        assert abs(a.occupied_area_ratio - b.occupied_area_ratio) < 1e-9


@settings(max_examples=30, deadline=None)
@given(
    n=st.integers(min_value=6, max_value=50),
    seed=st.integers(min_value=0, max_value=2**31 - 1),
)
def test_metric_bounds_fuzzed(n, seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 4))
    coords = rng.normal(size=(n, 2))
    labels = rng.integers(0, 3, size=n)
    k = min(3, n - 1)
    t = trustworthiness(X, coords, k=k)
    p = neighborhood_purity(coords, labels, k=k)
    assert 0.0 <= t <= 1.0
    assert 0.0 <= p <= 1.0
