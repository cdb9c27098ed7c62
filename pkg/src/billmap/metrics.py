"""Embedding-quality and projection-alignment metrics.

These turn visual claims ("the projection maps closely onto the training
manifold", "two distinct groups take shape") into numbers: rank-based
trustworthiness, label purity of embedding neighborhoods, and an alignment
report comparing projected points against the training layout.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_k, check_matrix
from .errors import ArgumentError
from .neighbors import pairwise_distances


def _knn_ids(D: np.ndarray, k: int) -> np.ndarray:
    """k nearest per row with self excluded, ties by lower index."""
    D = D.copy()
    np.fill_diagonal(D, np.inf)
    return np.argsort(D, axis=1, kind="stable")[:, :k]


def trustworthiness(X, coords, k: int, metric: str = "euclidean") -> float:
    """Rank-based fidelity of embedding neighborhoods, in [0, 1].

    Penalizes points that are k-neighbors in the embedding but not in
    feature space, weighted by how far down the feature-space ranking they
    sit; 1 means every embedding neighborhood is genuine.
    """
    X = check_matrix(X)
    coords = check_matrix(coords, "coords")
    n = X.shape[0]
    if coords.shape[0] != n:
        raise ArgumentError("X and coords must have the same number of rows")
    k = check_k(k, n)

    D_x = pairwise_distances(X, X, metric)
    D_y = pairwise_distances(coords, coords, "euclidean")

    order_x = _knn_ids(D_x, n - 1)  # full feature-space ranking
    ranks = np.empty((n, n), dtype=np.int64)
    for i in range(n):
        ranks[i, order_x[i]] = np.arange(1, n)
    nn_x = order_x[:, :k]
    nn_y = _knn_ids(D_y, k)

    penalty = 0
    for i in range(n):
        genuine = set(nn_x[i].tolist())
        for j in nn_y[i]:
            if int(j) not in genuine:
                penalty += ranks[i, j] - k

    if penalty == 0:
        return 1.0
    denom = n * k * (2 * n - 3 * k - 1)
    if denom <= 0:
        raise ArgumentError(
            f"k={k} is too large for the trustworthiness normalizer at n={n}"
        )
    return float(np.clip(1.0 - 2.0 * penalty / denom, 0.0, 1.0))


def neighborhood_purity(coords, labels, k: int) -> float:
    """Mean fraction of each point's k embedding neighbors sharing its label."""
    coords = check_matrix(coords, "coords")
    n = coords.shape[0]
    labels = np.asarray(labels)
    if labels.shape[0] != n:
        raise ArgumentError("labels must match coords rows")
    k = check_k(k, n)

    D = pairwise_distances(coords, coords, "euclidean")
    nn = _knn_ids(D, k)
    same = labels[nn] == labels[:, None]
    return float(same.mean())


# ---------------------------------------------------------------------------
# Alignment report


def hull_area_2d(points: np.ndarray) -> float:
    """Convex hull area via monotone chain + shoelace; degenerate sets -> 0."""
    pts = np.unique(np.asarray(points, dtype=np.float64), axis=0)
    if pts.shape[0] < 3:
        return 0.0
    pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))]

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list[np.ndarray] = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[np.ndarray] = []
    for p in pts[::-1]:
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = np.array(lower[:-1] + upper[:-1])
    if hull.shape[0] < 3:
        return 0.0
    x, y = hull[:, 0], hull[:, 1]
    return float(0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def _occupied_volume(points: np.ndarray) -> float:
    """Hull area in 2-D; bounding-box volume above (documented approximation)."""
    if points.shape[1] == 2:
        return hull_area_2d(points)
    spans = points.max(axis=0) - points.min(axis=0)
    return float(np.prod(spans))


@dataclass
class AlignmentReport:
    mean_nearest: float
    median_nearest: float
    train_nn_baseline: float
    overlap_ratio: float
    occupied_area_ratio: float
    per_party: dict[str, dict[str, float]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "mean_nearest": self.mean_nearest,
            "median_nearest": self.median_nearest,
            "train_nn_baseline": self.train_nn_baseline,
            "overlap_ratio": self.overlap_ratio,
            "occupied_area_ratio": self.occupied_area_ratio,
            "per_party": self.per_party,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_text(self) -> str:
        rows = [
            ("mean nearest-training distance", f"{self.mean_nearest:.6f}"),
            ("median nearest-training distance", f"{self.median_nearest:.6f}"),
            ("training NN baseline", f"{self.train_nn_baseline:.6f}"),
            ("overlap ratio", f"{self.overlap_ratio:.4f}"),
            ("occupied-area ratio", f"{self.occupied_area_ratio:.4f}"),
        ]
        for party in sorted(self.per_party):
            stats = self.per_party[party]
            rows.append(
                (
                    f"  {party} (n={int(stats['count'])})",
                    f"mean={stats['mean_nearest']:.6f} "
                    f"overlap={stats['overlap_ratio']:.4f}",
                )
            )
        width = max(len(r[0]) for r in rows)
        return "\n".join(f"{name:<{width}}  {value}" for name, value in rows)


def training_nn_distance(embedding: np.ndarray) -> float:
    """Mean nearest-neighbor distance within the training embedding."""
    D = pairwise_distances(embedding, embedding, "euclidean")
    np.fill_diagonal(D, np.inf)
    return float(D.min(axis=1).mean())


def alignment_report(model, projection) -> AlignmentReport:
    """Quantify how closely a projection overlays the training embedding.

    overlap_ratio is the projected points' mean nearest-training distance
    divided by the training set's own mean nearest-neighbor distance; values
    near or below 1 mean projected points interleave the manifold.
    occupied_area_ratio compares convex-hull areas (projected / training).
    """
    if projection.n_rows == 0:
        raise ArgumentError("projection is empty")
    train_coords = model.embedding
    baseline = training_nn_distance(train_coords)
    nearest = np.asarray(projection.nearest_train_dist, dtype=np.float64)

    mean_nearest = float(nearest.mean())
    overlap = float(mean_nearest / baseline) if baseline > 0 else float("inf")
    train_vol = _occupied_volume(train_coords)
    proj_vol = _occupied_volume(projection.coords)
    area_ratio = float(proj_vol / train_vol) if train_vol > 0 else float("nan")

    per_party: dict[str, dict[str, float]] = {}
    parties = np.asarray([p.value for p in projection.party_labels])
    for party in sorted(set(parties.tolist())):
        mask = parties == party
        sub = nearest[mask]
        per_party[party] = {
            "count": float(mask.sum()),
            "mean_nearest": float(sub.mean()),
            "median_nearest": float(np.median(sub)),
            "overlap_ratio": float(sub.mean() / baseline)
            if baseline > 0
            else float("inf"),
        }

    return AlignmentReport(
        mean_nearest=mean_nearest,
        median_nearest=float(np.median(nearest)),
        train_nn_baseline=baseline,
        overlap_ratio=overlap,
        occupied_area_ratio=area_ratio,
        per_party=per_party,
    )
