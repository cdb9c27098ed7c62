import datetime as dt
import math

import numpy as np
import pytest

from billmap.errors import ArgumentError
from billmap.fuzzy import FuzzyGraph
from billmap.optim import LowDimKernel
from billmap.oracles import (
    SyntheticSpec,
    blob_labels,
    dense_cross_entropy,
    dense_knn,
    generate_corpus,
)
from billmap.records import Chamber, Era


class TestDenseKnn:
    def test_exhaustive_k(self, rng):
        X = rng.normal(size=(8, 3))
        g = dense_knn(X, k=7)
        for i in range(8):
            assert sorted(g.ids[i].tolist()) == sorted(
                j for j in range(8) if j != i
            )

    def test_two_points(self):
        X = np.array([[0.0, 0.0], [3.0, 4.0]])
        g = dense_knn(X, k=1)
        assert g.ids[:, 0].tolist() == [1, 0]
        assert np.allclose(g.dists[:, 0], [5.0, 5.0])

    def test_guard(self, rng):
        with pytest.raises(ArgumentError):
            dense_knn(rng.normal(size=(2001, 2)), k=1)


class TestDenseCrossEntropy:
    def test_identity_is_zero(self):
        kernel = LowDimKernel(1.0, 1.0)
        coords = np.array([[0.0, 0.0], [1.0, 0.0]])
        v = 1.0 / (1.0 + 1.0)
        g = FuzzyGraph(
            n=2,
            rows=np.array([0], dtype=np.int64),
            cols=np.array([1], dtype=np.int64),
            vals=np.array([v]),
            rho=np.zeros(2),
            sigma=np.ones(2),
            clamped=np.zeros(2, dtype=bool),
            target=1.0,
        )
        assert abs(dense_cross_entropy(g, coords, kernel)) < 1e-12

    def test_near_coincident_pair_clamps_finite(self):
        # w -> 1 as the pair collapses; the clamp keeps the loss finite
        kernel = LowDimKernel(1.0, 1.0)
        coords = np.array([[0.0, 0.0], [1e-9, 0.0]])
        g = FuzzyGraph(
            n=2,
            rows=np.array([0], dtype=np.int64),
            cols=np.array([1], dtype=np.int64),
            vals=np.array([0.5]),
            rho=np.zeros(2),
            sigma=np.ones(2),
            clamped=np.zeros(2, dtype=bool),
            target=1.0,
        )
        loss = dense_cross_entropy(g, coords, kernel)
        assert np.isfinite(loss)
        # attract term ~ v log v - v log w with w ~= 1; repel term hits clamp
        assert loss > 0

    def test_guard(self, rng):
        kernel = LowDimKernel(1.0, 1.0)
        g = FuzzyGraph(
            n=501,
            rows=np.array([0], dtype=np.int64),
            cols=np.array([1], dtype=np.int64),
            vals=np.array([0.5]),
            rho=np.zeros(501),
            sigma=np.ones(501),
            clamped=np.zeros(501, dtype=bool),
            target=1.0,
        )
        with pytest.raises(ArgumentError):
            dense_cross_entropy(g, rng.normal(size=(501, 2)), kernel)


class TestGenerateCorpus:
    def test_counts_exact(self):
        corpus = generate_corpus(SyntheticSpec(n_pre=300, n_covid=150, seed=0))
        assert len(corpus) == 450
        counts = corpus.era_counts()
        assert counts["PreCovid"] == 300
        assert counts["Covid"] == 150

    def test_deterministic(self):
        a = generate_corpus(SyntheticSpec(seed=9))
        b = generate_corpus(SyntheticSpec(seed=9))
        assert a.records == b.records

    def test_invariants_hold(self):
        corpus = generate_corpus(SyntheticSpec(n_pre=100, n_covid=50, seed=2))
        for rec in corpus:
            if rec.chamber is Chamber.SENATE:
                assert rec.sponsor_district == 0
            assert rec.last_action_date >= rec.intro_date
            assert rec.cosponsor_count >= 0
            assert (rec.congress >= 116) == (rec.era is Era.COVID)

    def test_zero_time_signal_mixes_date_distributions(self):
        corpus = generate_corpus(
            SyntheticSpec(n_pre=400, n_covid=400, time_signal=0.0, seed=5)
        )
        epoch = dt.date(1970, 1, 1)
        pre = np.array(
            [(r.intro_date - epoch).days for r in corpus if r.era is Era.PRE_COVID]
        )
        cov = np.array(
            [(r.intro_date - epoch).days for r in corpus if r.era is Era.COVID]
        )
        # same underlying uniform distribution: means within a fraction of
        # the pooled spread
        pooled = np.concatenate([pre, cov]).std()
        assert abs(pre.mean() - cov.mean()) < 0.15 * pooled

    def test_strong_time_signal_separates_dates(self):
        corpus = generate_corpus(
            SyntheticSpec(n_pre=200, n_covid=100, time_signal=6.0, seed=5)
        )
        epoch = dt.date(1970, 1, 1)
        pre = max(
            r.intro_date for r in corpus if r.era is Era.PRE_COVID
        )
        cov = min(r.intro_date for r in corpus if r.era is Era.COVID)
        assert (cov - pre).days > 365 * 5

    def test_blob_labels_parse(self):
        corpus = generate_corpus(SyntheticSpec(n_pre=30, n_covid=9, n_blobs=3, seed=0))
        labels = blob_labels(corpus)
        assert set(labels.tolist()) == {0, 1, 2}
        assert labels.shape == (39,)

    def test_bad_spec_rejected(self):
        with pytest.raises(ArgumentError):
            SyntheticSpec(n_blobs=0)
        with pytest.raises(ArgumentError):
            SyntheticSpec(time_signal=-1.0)
