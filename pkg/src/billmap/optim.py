"""Low-dimensional layout optimization.

The embedding minimizes the cross-entropy between high-dimensional
memberships v_ij and low-dimensional memberships w_ij, where

    w(x) = 1 / (1 + a * x**(2b))

is a smooth kernel fit so that w is ~1 out to ``min_dist`` and decays like
exp(-(x - min_dist)/spread) beyond it. Optimization is stochastic gradient
descent over the graph's edges with uniform negative sampling standing in
for the quadratic repulsion term.

The loss convention throughout (including the test oracles) sums each
unordered pair {i, j} once; logs are clamped at 1e-12.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.optimize import curve_fit
from scipy.sparse.csgraph import connected_components
from scipy.spatial.distance import cdist

from . import _layout
from ._validation import check_matrix, check_seed
from .errors import ArgumentError, NumericError
from .fuzzy import FuzzyGraph

EPS = 1e-12

INIT_SPECTRAL = "spectral"
INIT_RANDOM = "random"

# coordinate range used by both initializers
_INIT_SCALE = 10.0
_DENSE_EIG_LIMIT = 2000


@dataclass(frozen=True)
class EmbeddingConfig:
    """Hyperparameters for the layout optimization."""

    n_components: int = 2
    n_epochs: int = 450
    min_dist: float = 0.1
    spread: float = 1.0
    initial_lr: float = 1.0
    neg_samples: int = 5
    seed: int = 0
    init: str = INIT_SPECTRAL
    parallel: bool = False
    grad_clip: float = 4.0

    def __post_init__(self):
        if self.n_components < 1:
            raise ArgumentError("n_components must be >= 1")
        if self.n_epochs < 0:
            raise ArgumentError("n_epochs must be >= 0")
        if not 0.0 < self.min_dist <= self.spread:
            raise ArgumentError("need 0 < min_dist <= spread")
        if self.neg_samples < 1:
            raise ArgumentError("neg_samples must be >= 1")
        if self.init not in (INIT_SPECTRAL, INIT_RANDOM):
            raise ArgumentError(f"unknown init {self.init!r}")

    def to_dict(self) -> dict:
        return {
            "n_components": self.n_components,
            "n_epochs": self.n_epochs,
            "min_dist": self.min_dist,
            "spread": self.spread,
            "initial_lr": self.initial_lr,
            "neg_samples": self.neg_samples,
            "seed": self.seed,
            "init": self.init,
            "parallel": self.parallel,
            "grad_clip": self.grad_clip,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EmbeddingConfig":
        return cls(**data)


@dataclass(frozen=True)
class LowDimKernel:
    """Similarity kernel w(x) = 1/(1 + a x^(2b)); w(0) = 1, decreasing."""

    a: float
    b: float

    def similarity(self, dist: np.ndarray | float) -> np.ndarray | float:
        return 1.0 / (1.0 + self.a * np.asarray(dist, dtype=np.float64) ** (2.0 * self.b))

    def similarity_sq(self, d2: np.ndarray | float) -> np.ndarray | float:
        return 1.0 / (1.0 + self.a * np.asarray(d2, dtype=np.float64) ** self.b)

    def to_dict(self) -> dict:
        return {"a": self.a, "b": self.b}

    @classmethod
    def from_dict(cls, data: dict) -> "LowDimKernel":
        return cls(a=float(data["a"]), b=float(data["b"]))


@dataclass
class Embedding:
    coords: np.ndarray
    config: EmbeddingConfig
    final_loss: float
    loss_trace: list[tuple[int, float]] = field(default_factory=list)


def kernel_target_curve(x: np.ndarray, min_dist: float, spread: float) -> np.ndarray:
    """Ideal low-dimensional membership: flat at 1 inside min_dist, then
    exponential decay with the given spread."""
    y = np.ones_like(x)
    tail = x >= min_dist
    y[tail] = np.exp(-(x[tail] - min_dist) / spread)
    return y


def fit_kernel(min_dist: float = 0.1, spread: float = 1.0) -> LowDimKernel:
    """Least-squares fit of the smooth kernel family to the target curve
    over x in [0, 3*spread]."""
    if not 0.0 < min_dist <= spread:
        raise ArgumentError("need 0 < min_dist <= spread")

    xv = np.linspace(0.0, spread * 3.0, 300)
    yv = kernel_target_curve(xv, min_dist, spread)

    def curve(x, a, b):
        return 1.0 / (1.0 + a * x ** (2.0 * b))

    try:
        params, _ = curve_fit(curve, xv, yv)
    except RuntimeError as exc:
        raise NumericError(f"kernel fit did not converge: {exc}") from exc
    a, b = float(params[0]), float(params[1])
    if not (np.isfinite(a) and np.isfinite(b) and a > 0 and b > 0):
        raise ArgumentError(f"kernel fit produced invalid parameters a={a}, b={b}")
    residual = float(np.sqrt(np.mean((curve(xv, a, b) - yv) ** 2)))
    if residual > 0.2:
        raise NumericError(f"kernel fit residual too large: rms={residual:.4f}")
    return LowDimKernel(a=a, b=b)


# ---------------------------------------------------------------------------
# Cross-entropy loss


def _ce_pair_terms(v: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Clamped cross-entropy contribution per pair."""
    v = np.asarray(v, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    attract = np.where(
        v > 0.0,
        v * (np.log(np.maximum(v, EPS)) - np.log(np.maximum(w, EPS))),
        0.0,
    )
    repel = np.where(
        v < 1.0,
        (1.0 - v)
        * (np.log(np.maximum(1.0 - v, EPS)) - np.log(np.maximum(1.0 - w, EPS))),
        0.0,
    )
    return attract + repel


def cross_entropy(
    graph: FuzzyGraph,
    coords: np.ndarray,
    kernel: LowDimKernel,
    zero_edge_samples: int | None = None,
    seed: int = 0,
) -> float:
    """Cross-entropy between graph memberships and embedding memberships.

    The stored-edge term is exact. The zero-edge term (all pairs without a
    stored edge, where v = 0) is computed exactly when
    ``zero_edge_samples`` is None, otherwise estimated from that many
    uniformly sampled pairs.
    """
    coords = check_matrix(coords, "coords")
    n = graph.n
    if coords.shape[0] != n:
        raise ArgumentError("coords row count does not match graph")

    diff = coords[graph.rows] - coords[graph.cols]
    d2 = np.einsum("ij,ij->i", diff, diff)
    w_edges = kernel.similarity_sq(d2)
    edge_term = float(_ce_pair_terms(graph.vals, w_edges).sum())
    # the zero-edge formula applied at stored edges, to be replaced
    edge_zero_version = float(-np.log(np.maximum(1.0 - w_edges, EPS)).sum())

    total_pairs = n * (n - 1) // 2
    if zero_edge_samples is None:
        zero_total = 0.0
        for i in range(n - 1):
            d2_row = ((coords[i + 1 :] - coords[i]) ** 2).sum(axis=1)
            w_row = kernel.similarity_sq(d2_row)
            zero_total += float(-np.log(np.maximum(1.0 - w_row, EPS)).sum())
        return edge_term + (zero_total - edge_zero_version)

    m = int(zero_edge_samples)
    if m < 1:
        raise ArgumentError("zero_edge_samples must be >= 1")
    rng = np.random.default_rng(seed)
    ii = rng.integers(0, n, size=m)
    jj = rng.integers(0, n - 1, size=m)
    jj[jj >= ii] += 1
    lo = np.minimum(ii, jj)
    hi = np.maximum(ii, jj)
    keys = lo.astype(np.int64) * n + hi.astype(np.int64)
    edge_keys = np.sort(graph.rows * n + graph.cols)
    pos = np.searchsorted(edge_keys, keys)
    pos = np.minimum(pos, edge_keys.size - 1) if edge_keys.size else pos
    is_edge = (
        edge_keys[pos] == keys if edge_keys.size else np.zeros(m, dtype=bool)
    )
    d2_s = ((coords[lo] - coords[hi]) ** 2).sum(axis=1)
    w_s = kernel.similarity_sq(d2_s)
    contrib = np.where(is_edge, 0.0, -np.log(np.maximum(1.0 - w_s, EPS)))
    zero_estimate = float(contrib.mean() * total_pairs)
    return edge_term + zero_estimate


def cross_entropy_gradient(
    graph: FuzzyGraph, coords: np.ndarray, kernel: LowDimKernel
) -> np.ndarray:
    """Analytic gradient of the dense (unordered-pair) cross-entropy.

    O(n^2); intended for gradient checking and small diagnostics. Clamped
    log regions and exactly coincident points contribute zero gradient.
    """
    coords = check_matrix(coords, "coords")
    n, _ = coords.shape
    a, b = kernel.a, kernel.b

    V = np.zeros((n, n))
    V[graph.rows, graph.cols] = graph.vals
    V[graph.cols, graph.rows] = graph.vals

    D2 = cdist(coords, coords, "sqeuclidean")
    np.fill_diagonal(D2, 0.0)
    pos = D2 > 0  # excludes self-pairs and exactly coincident points
    att = np.zeros((n, n))
    rep = np.zeros((n, n))
    denom = 1.0 + a * D2[pos] ** b
    att[pos] = 2.0 * a * b * D2[pos] ** (b - 1.0) / denom
    rep[pos] = -2.0 * b / (D2[pos] * denom)
    # no repulsion gradient where the clamp is active (w -> 1)
    w = np.zeros((n, n))
    w[pos] = 1.0 / denom
    rep[1.0 - w < EPS] = 0.0

    C = V * att + (1.0 - V) * rep
    np.fill_diagonal(C, 0.0)
    return C.sum(axis=1)[:, None] * coords - C @ coords


# ---------------------------------------------------------------------------
# Initialization


def _spectral_component(A: sp.csr_matrix, dim: int) -> np.ndarray:
    """Leading nontrivial eigenvectors of the symmetric normalized Laplacian,
    scaled to [-1, 1] per axis."""
    m = A.shape[0]
    if m == 1:
        return np.zeros((1, dim))
    n_vecs = min(dim, m - 1)

    deg = np.asarray(A.sum(axis=1)).ravel()
    inv_sqrt = 1.0 / np.sqrt(np.maximum(deg, EPS))
    D = sp.diags(inv_sqrt)
    L = sp.identity(m, format="csr") - D @ A @ D

    if m <= _DENSE_EIG_LIMIT:
        _, vecs = np.linalg.eigh(L.toarray())
        basis = vecs[:, 1 : n_vecs + 1]
    else:
        from scipy.sparse.linalg import eigsh

        v0 = np.full(m, 1.0 / np.sqrt(m))
        _, vecs = eigsh(L, k=n_vecs + 1, which="SA", v0=v0, tol=1e-4)
        basis = vecs[:, 1 : n_vecs + 1]

    coords = np.zeros((m, dim))
    coords[:, :n_vecs] = basis
    scale = np.abs(coords).max(axis=0)
    scale[scale == 0.0] = 1.0
    return coords / scale


def initialize(graph: FuzzyGraph, config: EmbeddingConfig) -> np.ndarray:
    """Initial coordinates in [-10, 10]^d.

    Spectral initialization embeds each connected component with Laplacian
    eigenvectors and offsets components deterministically along the first
    axis; eigensolver failure falls back to the seeded random initializer
    with a warning.
    """
    n = graph.n
    dim = config.n_components
    rng = np.random.default_rng(check_seed(config.seed))
    if config.init == INIT_RANDOM:
        return rng.uniform(-_INIT_SCALE, _INIT_SCALE, size=(n, dim))

    A = graph.to_csr()
    n_comps, labels = connected_components(A, directed=False)
    coords = np.zeros((n, dim))
    try:
        for c in range(n_comps):
            idx = np.flatnonzero(labels == c)
            sub = A[idx][:, idx].tocsr()
            comp = _spectral_component(sub, dim)
            comp[:, 0] += 3.0 * c  # separate components along the first axis
            coords[idx] = comp
    except Exception as exc:  # pragma: no cover - solver failures are rare
        warnings.warn(
            f"spectral initialization failed ({exc}); falling back to random",
            RuntimeWarning,
        )
        return rng.uniform(-_INIT_SCALE, _INIT_SCALE, size=(n, dim))

    max_abs = np.abs(coords).max()
    if max_abs > 0:
        coords *= _INIT_SCALE / max_abs
    coords += rng.normal(0.0, 1e-4, size=coords.shape)
    return coords


# ---------------------------------------------------------------------------
# SGD optimization


def _directed_edges(graph: FuzzyGraph):
    heads = np.concatenate([graph.rows, graph.cols])
    tails = np.concatenate([graph.cols, graph.rows])
    vals = np.concatenate([graph.vals, graph.vals])
    order = np.lexsort((tails, heads))
    return heads[order], tails[order], vals[order]


def optimize(
    graph: FuzzyGraph,
    coords: np.ndarray,
    kernel: LowDimKernel,
    config: EmbeddingConfig,
    loss_trace_interval: int | None = None,
) -> Embedding:
    """SGD layout optimization of initialized coordinates.

    Every directed edge (i, j) fires once per 1/v_ij epochs; when it fires,
    i takes one attractive step toward j and ``neg_samples`` repulsive steps
    away from uniformly sampled points. Per-coordinate gradients are clipped
    to +-grad_clip. The learning rate decays linearly to zero. Single-
    threaded mode is bit-reproducible for a fixed seed.
    """
    coords = np.array(check_matrix(coords, "coords"), copy=True)
    if coords.shape != (graph.n, config.n_components):
        raise ArgumentError(
            f"coords shape {coords.shape} does not match "
            f"(n={graph.n}, d={config.n_components})"
        )

    heads, tails, vals = _directed_edges(graph)
    epochs_per_sample = 1.0 / vals
    next_due = epochs_per_sample - 1.0

    trace: list[tuple[int, float]] = []

    def sampled_loss(epoch: int) -> float:
        m = min(graph.n * (graph.n - 1) // 2, max(2048, 4 * graph.n_edges))
        return cross_entropy(
            graph,
            coords,
            kernel,
            zero_edge_samples=m,
            seed=(check_seed(config.seed), epoch),
        )

    kernel_fn = _layout.sgd_epochs_parallel if config.parallel else _layout.sgd_epochs
    _layout.seed_rng(check_seed(config.seed))

    if loss_trace_interval is not None and loss_trace_interval < 1:
        raise ArgumentError("loss_trace_interval must be >= 1")

    epoch = 0
    if loss_trace_interval is not None:
        trace.append((0, sampled_loss(0)))
    while epoch < config.n_epochs:
        if loss_trace_interval is None:
            stop = config.n_epochs
        else:
            stop = min(epoch + loss_trace_interval, config.n_epochs)
        kernel_fn(
            coords,
            coords,
            heads,
            tails,
            epochs_per_sample,
            next_due,
            epoch,
            stop,
            config.n_epochs,
            config.initial_lr,
            kernel.a,
            kernel.b,
            config.neg_samples,
            True,
            config.grad_clip,
        )
        epoch = stop
        if loss_trace_interval is not None:
            trace.append((epoch, sampled_loss(epoch)))

    if not np.isfinite(coords).all():
        bad = int(np.flatnonzero(~np.isfinite(coords).all(axis=1))[0])
        raise NumericError(f"non-finite embedding coordinate at point {bad}")

    final_loss = sampled_loss(config.n_epochs)
    return Embedding(coords=coords, config=config, final_loss=final_loss, loss_trace=trace)


# new points start near-converged (weighted-mean initialization), so the
# refinement runs at a fraction of the fit learning rate
TRANSFORM_LR_FRACTION = 0.25


def project_points(
    new_coords: np.ndarray,
    train_coords: np.ndarray,
    heads: np.ndarray,
    tails: np.ndarray,
    weights: np.ndarray,
    n_epochs: int,
    kernel: LowDimKernel,
    config: EmbeddingConfig,
    seed: int,
) -> np.ndarray:
    """SGD refinement of new points against a frozen reference embedding.

    Edges are directed new->training; negative samples are drawn from the
    training set only, so repulsion positions new points relative to the
    learned manifold rather than to each other.
    """
    new_coords = np.array(new_coords, dtype=np.float64, copy=True)
    if n_epochs == 0 or heads.size == 0:
        return new_coords
    epochs_per_sample = 1.0 / weights
    next_due = epochs_per_sample - 1.0
    kernel_fn = _layout.sgd_epochs_parallel if config.parallel else _layout.sgd_epochs
    _layout.seed_rng(check_seed(seed))
    kernel_fn(
        new_coords,
        np.ascontiguousarray(train_coords),
        heads,
        tails,
        epochs_per_sample,
        next_due,
        0,
        n_epochs,
        n_epochs,
        config.initial_lr * TRANSFORM_LR_FRACTION,
        kernel.a,
        kernel.b,
        config.neg_samples,
        False,
        config.grad_clip,
    )
    if not np.isfinite(new_coords).all():
        raise NumericError("non-finite coordinates after projection refinement")
    return new_coords
