"""Scikit-learn style estimator wrapping the full embedding pipeline.

``ManifoldEmbedding.fit`` builds the k-nearest-neighbor graph, calibrates
the fuzzy membership graph, fits the low-dimensional kernel, and optimizes
the layout. ``transform`` projects new rows onto the frozen fitted layout
(training coordinates never move), which is what makes era-over-era
comparisons possible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import check_k, check_matrix, check_seed
from .errors import ArgumentError
from .fuzzy import build_fuzzy_graph, calibrate_sigma, local_strengths
from .neighbors import (
    EXACT_FALLBACK_FACTOR,
    NeighborGraph,
    knn_approx,
    knn_exact,
    pairwise_distances,
)
from .optim import (
    EmbeddingConfig,
    LowDimKernel,
    fit_kernel,
    initialize,
    optimize,
    project_points,
)

# exact kNN below this many rows, neighbor descent above
DEFAULT_EXACT_THRESHOLD = 4096


@dataclass
class MatrixProjection:
    """Out-of-sample projection of raw feature rows."""

    coords: np.ndarray
    nearest_train_dist: np.ndarray  # embedding-space distance to closest training point
    neighbor_ids: np.ndarray  # feature-space training neighbors per new row
    neighbor_weights: np.ndarray


class ManifoldEmbedding(BaseEstimator):
    """Fuzzy-graph manifold embedding with out-of-sample projection.

    Parameters
    ----------
    n_neighbors : neighborhood size for the graph construction.
    n_components : embedding dimensionality.
    n_epochs : optimization epochs (full passes over the edge schedule).
    min_dist : minimum spacing scale of the low-dimensional kernel.
    spread : decay scale of the low-dimensional kernel.
    metric : "euclidean", "manhattan", or "cosine".
    learning_rate : initial SGD step size, decayed linearly to zero.
    negative_sample_rate : repulsive samples per attractive update.
    init : "spectral" or "random".
    random_state : seed; single-threaded runs are bit-reproducible.
    transform_epochs : default SGD refinement epochs for transform().
    exact_threshold : above this many rows the approximate kNN path is used.
    parallel : tolerate asynchronous coordinate updates (not reproducible).
    """

    def __init__(
        self,
        n_neighbors: int = 45,
        n_components: int = 2,
        n_epochs: int = 450,
        min_dist: float = 0.1,
        spread: float = 1.0,
        metric: str = "euclidean",
        learning_rate: float = 1.0,
        negative_sample_rate: int = 5,
        init: str = "spectral",
        random_state: int = 0,
        transform_epochs: int = 30,
        exact_threshold: int = DEFAULT_EXACT_THRESHOLD,
        parallel: bool = False,
        loss_trace_interval: int | None = None,
    ):
        self.n_neighbors = n_neighbors
        self.n_components = n_components
        self.n_epochs = n_epochs
        self.min_dist = min_dist
        self.spread = spread
        self.metric = metric
        self.learning_rate = learning_rate
        self.negative_sample_rate = negative_sample_rate
        self.init = init
        self.random_state = random_state
        self.transform_epochs = transform_epochs
        self.exact_threshold = exact_threshold
        self.parallel = parallel
        self.loss_trace_interval = loss_trace_interval

    # -- fitting -----------------------------------------------------------

    def _config(self) -> EmbeddingConfig:
        return EmbeddingConfig(
            n_components=self.n_components,
            n_epochs=self.n_epochs,
            min_dist=self.min_dist,
            spread=self.spread,
            initial_lr=self.learning_rate,
            neg_samples=self.negative_sample_rate,
            seed=check_seed(self.random_state),
            init=self.init,
            parallel=self.parallel,
        )

    def fit(self, X, y=None) -> "ManifoldEmbedding":
        X = check_matrix(X)
        k = check_k(self.n_neighbors, X.shape[0])
        config = self._config()

        if X.shape[0] <= self.exact_threshold:
            neighbor_graph = knn_exact(X, k, self.metric)
        else:
            neighbor_graph = knn_approx(X, k, self.metric, seed=config.seed)

        graph = build_fuzzy_graph(neighbor_graph)
        kernel = fit_kernel(self.min_dist, self.spread)
        coords = initialize(graph, config)
        result = optimize(
            graph, coords, kernel, config,
            loss_trace_interval=self.loss_trace_interval,
        )

        self.training_data_ = X
        self.neighbor_graph_ = neighbor_graph
        self.graph_ = graph
        self.kernel_ = kernel
        self.config_ = config
        self.embedding_ = result.coords
        self.final_loss_ = result.final_loss
        self.loss_trace_ = result.loss_trace
        return self

    def fit_transform(self, X, y=None) -> np.ndarray:
        return self.fit(X).embedding_

    def _check_fitted(self):
        if not hasattr(self, "embedding_"):
            raise ArgumentError("estimator is not fitted")

    # -- out-of-sample projection -------------------------------------------

    def project(
        self,
        X,
        transform_epochs: int | None = None,
        seed: int | None = None,
    ) -> MatrixProjection:
        """Project new rows onto the frozen fitted embedding.

        Each new point is matched to its n_neighbors nearest training rows
        in feature space, given calibrated membership weights, initialized
        at the weight-averaged coordinates of those neighbors (a convex
        combination), and optionally refined by SGD against the frozen
        training layout.
        """
        self._check_fitted()
        X = check_matrix(X)
        if X.shape[1] != self.training_data_.shape[1]:
            raise ArgumentError(
                f"feature width {X.shape[1]} does not match training width "
                f"{self.training_data_.shape[1]}"
            )
        if transform_epochs is None:
            transform_epochs = self.transform_epochs
        if transform_epochs < 0:
            raise ArgumentError("transform_epochs must be >= 0")
        seed = check_seed(self.random_state if seed is None else seed)

        n_train = self.training_data_.shape[0]
        k = min(self.n_neighbors, n_train)
        D = pairwise_distances(X, self.training_data_, self.metric)
        order = np.argsort(D, axis=1, kind="stable")[:, :k]
        dists = np.take_along_axis(D, order, axis=1)

        m = X.shape[0]
        weights = np.empty((m, k))
        target = float(np.log2(k)) if k >= 2 else 1.0
        for i in range(m):
            if k >= 2:
                rho, sigma, _ = calibrate_sigma(dists[i], target=target)
            else:
                rho, sigma = float(dists[i, 0]), 1.0
            weights[i] = np.exp(-np.maximum(dists[i] - rho, 0.0) / sigma)

        # weighted-mean initialization: convex combination of neighbor coords
        wsum = weights.sum(axis=1, keepdims=True)
        norm_w = weights / wsum
        coords = np.einsum("mk,mkd->md", norm_w, self.embedding_[order])

        if transform_epochs > 0:
            heads = np.repeat(np.arange(m, dtype=np.int64), k)
            tails = order.ravel().astype(np.int64)
            vals = weights.ravel()
            keep = vals > 1e-300  # drop numerically-zero memberships
            coords = project_points(
                coords,
                self.embedding_,
                heads[keep],
                tails[keep],
                vals[keep],
                transform_epochs,
                self.kernel_,
                self.config_,
                seed,
            )

        emb_dist = pairwise_distances(coords, self.embedding_, "euclidean")
        nearest = emb_dist.min(axis=1)
        return MatrixProjection(
            coords=coords,
            nearest_train_dist=nearest,
            neighbor_ids=order.astype(np.int64),
            neighbor_weights=weights,
        )

    def transform(self, X) -> np.ndarray:
        return self.project(X).coords

    # -- persistence helpers -------------------------------------------------

    def to_dict(self) -> dict:
        self._check_fitted()
        return {
            "params": self.get_params(),
            "training_data": self.training_data_.tolist(),
            "neighbor_graph": self.neighbor_graph_.to_dict(),
            "fuzzy_graph": self.graph_.to_dict(),
            "kernel": self.kernel_.to_dict(),
            "config": self.config_.to_dict(),
            "embedding": self.embedding_.tolist(),
            "final_loss": self.final_loss_,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ManifoldEmbedding":
        est = cls(**data["params"])
        est.training_data_ = np.asarray(data["training_data"], dtype=np.float64)
        est.neighbor_graph_ = NeighborGraph.from_dict(data["neighbor_graph"])
        from .fuzzy import FuzzyGraph

        est.graph_ = FuzzyGraph.from_dict(data["fuzzy_graph"])
        est.kernel_ = LowDimKernel.from_dict(data["kernel"])
        est.config_ = EmbeddingConfig.from_dict(data["config"])
        est.embedding_ = np.asarray(data["embedding"], dtype=np.float64)
        est.final_loss_ = float(data["final_loss"])
        return est
