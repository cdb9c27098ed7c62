"""k-nearest-neighbor graphs under pluggable metrics.

Two paths: an exact brute-force search (the default at desk scale, and the
reference for testing) and a neighbor-descent style approximate search for
larger inputs. Ties are always broken by lower index so that duplicate-heavy
one-hot data yields reproducible graphs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from ._validation import check_k, check_matrix
from .errors import ArgumentError

METRICS = ("euclidean", "manhattan", "cosine")

_CDIST_NAMES = {"euclidean": "euclidean", "manhattan": "cityblock", "cosine": "cosine"}

# Below this size the approximate path just runs the exact search.
EXACT_FALLBACK_FACTOR = 4


def pairwise_distances(A: np.ndarray, B: np.ndarray, metric: str) -> np.ndarray:
    if metric not in METRICS:
        raise ArgumentError(f"unknown metric {metric!r}; choose from {METRICS}")
    D = cdist(A, B, metric=_CDIST_NAMES[metric])
    # cosine can go fractionally negative through floating point
    np.maximum(D, 0.0, out=D)
    return D


@dataclass
class NeighborGraph:
    """Per-point neighbor ids and ascending distances (self excluded)."""

    k: int
    ids: np.ndarray
    dists: np.ndarray
    metric: str
    recall: float | None = field(default=None, compare=False)

    @property
    def n(self) -> int:
        return self.ids.shape[0]

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "metric": self.metric,
            "ids": self.ids.tolist(),
            "dists": self.dists.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "NeighborGraph":
        return cls(
            k=int(data["k"]),
            ids=np.asarray(data["ids"], dtype=np.int64),
            dists=np.asarray(data["dists"], dtype=np.float64),
            metric=str(data["metric"]),
        )


def _topk_rows(D: np.ndarray, row_offset: int, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Smallest-k per row with self excluded; stable sort breaks ties by index."""
    for r in range(D.shape[0]):
        D[r, row_offset + r] = np.inf
    order = np.argsort(D, axis=1, kind="stable")[:, :k]
    dists = np.take_along_axis(D, order, axis=1)
    return order.astype(np.int64), dists


def knn_exact(X, k: int, metric: str = "euclidean", block_rows: int = 1024) -> NeighborGraph:
    """Exact k-nearest neighbors by blocked all-pairs distances.

    For every point the k nearest others are found under ``metric``; ties
    broken by lower index. Requires 1 <= k < n.
    """
    X = check_matrix(X)
    n = X.shape[0]
    k = check_k(k, n)

    ids = np.empty((n, k), dtype=np.int64)
    dists = np.empty((n, k), dtype=np.float64)
    for start in range(0, n, block_rows):
        stop = min(start + block_rows, n)
        D = pairwise_distances(X[start:stop], X, metric)
        ids[start:stop], dists[start:stop] = _topk_rows(D, start, k)
    return NeighborGraph(k=k, ids=ids, dists=dists, metric=metric)


def _merge_candidates(
    x_i: np.ndarray,
    X: np.ndarray,
    cur_ids: np.ndarray,
    cur_dists: np.ndarray,
    cand: np.ndarray,
    metric: str,
    k: int,
) -> tuple[np.ndarray, np.ndarray, int]:
    cand_d = pairwise_distances(x_i[None, :], X[cand], metric)[0]
    all_ids = np.concatenate([cur_ids, cand])
    all_d = np.concatenate([cur_dists, cand_d])
    # sort by (distance, id) then dedupe keeping the first occurrence
    order = np.lexsort((all_ids, all_d))
    all_ids = all_ids[order]
    all_d = all_d[order]
    _, first = np.unique(all_ids, return_index=True)
    keep = np.sort(first)
    all_ids = all_ids[keep]
    all_d = all_d[keep]
    order = np.lexsort((all_ids, all_d))[:k]
    new_ids = all_ids[order]
    changed = int(np.setdiff1d(new_ids, cur_ids, assume_unique=False).size)
    return new_ids, all_d[order], changed


def knn_approx(
    X,
    k: int,
    metric: str = "euclidean",
    seed: int = 0,
    n_iters: int = 10,
    max_candidates: int = 60,
    report_recall: bool = False,
) -> NeighborGraph:
    """Neighbor-descent approximate kNN, deterministic for a given seed.

    Starts from a random neighbor list and repeatedly explores
    neighbors-of-neighbors (plus reverse neighbors), keeping the k best per
    point. Small inputs (n <= 4k) fall back to the exact search. When
    ``report_recall`` is set, recall against the exact graph is computed and
    stored on the result.
    """
    X = check_matrix(X)
    n = X.shape[0]
    k = check_k(k, n)
    if n_iters < 1:
        raise ArgumentError(f"n_iters must be >= 1, got {n_iters}")

    if n <= EXACT_FALLBACK_FACTOR * k:
        g = knn_exact(X, k, metric)
        g.recall = 1.0 if report_recall else None
        return g

    rng = np.random.default_rng(seed)
    ids = np.empty((n, k), dtype=np.int64)
    dists = np.empty((n, k), dtype=np.float64)
    for i in range(n):
        choice = rng.choice(n - 1, size=k, replace=False)
        choice[choice >= i] += 1  # skip self
        d = pairwise_distances(X[i][None, :], X[choice], metric)[0]
        order = np.lexsort((choice, d))
        ids[i] = choice[order]
        dists[i] = d[order]

    for _ in range(n_iters):
        reverse: list[list[int]] = [[] for _ in range(n)]
        for i in range(n):
            for j in ids[i]:
                reverse[j].append(i)
        total_changed = 0
        for i in range(n):
            cand = np.unique(
                np.concatenate([ids[ids[i]].ravel(), np.asarray(reverse[i], dtype=np.int64)])
            )
            cand = cand[(cand != i)]
            cand = np.setdiff1d(cand, ids[i], assume_unique=False)
            if cand.size == 0:
                continue
            if cand.size > max_candidates:
                cand = rng.choice(cand, size=max_candidates, replace=False)
                cand.sort()
            ids[i], dists[i], changed = _merge_candidates(
                X[i], X, ids[i], dists[i], cand, metric, k
            )
            total_changed += changed
        if total_changed == 0:
            break

    graph = NeighborGraph(k=k, ids=ids, dists=dists, metric=metric)
    if report_recall:
        exact = knn_exact(X, k, metric)
        hits = sum(
            np.intersect1d(ids[i], exact.ids[i]).size for i in range(n)
        )
        graph.recall = hits / float(n * k)
    return graph
