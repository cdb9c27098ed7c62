"""Fuzzy membership graphs from k-nearest-neighbor distances.

Each point i gets a local offset rho_i (distance to its nearest neighbor,
guaranteeing at least one full-strength edge) and a bandwidth sigma_i
calibrated by bisection so the total membership mass of its neighborhood
hits a fixed target (log2 of the neighborhood size by default). Directed
strengths exp(-max(0, d - rho)/sigma) are then merged into a single
symmetric graph with the probabilistic union a + b - a*b.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp

from .errors import ArgumentError, DataError
from .neighbors import NeighborGraph

SIGMA_MIN = 1e-8
SIGMA_MAX = 1e6
DEFAULT_TOL = 1e-5
DEFAULT_MAX_ITER = 64


class SigmaCalibration(NamedTuple):
    rho: float
    sigma: float
    clamped: bool


def _membership_mass(dists: np.ndarray, rho: float, sigma: float) -> float:
    return float(np.exp(-np.maximum(dists - rho, 0.0) / sigma).sum())


def calibrate_sigma(
    dists_i,
    target: float | None = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> SigmaCalibration:
    """Solve for (rho_i, sigma_i) from one point's ascending neighbor distances.

    rho is the nearest-neighbor distance. sigma solves

        sum_j exp(-max(0, d_j - rho) / sigma) = target

    by bisection on [1e-8, 1e6] until the residual is within ``tol``; when
    the target is unattainable (the mass is above/below it for every sigma)
    the nearer bound is returned with ``clamped`` set.

    The default target is log2(k).
    """
    d = np.asarray(dists_i, dtype=np.float64)
    if d.ndim != 1 or d.size < 2:
        raise ArgumentError("need at least 2 neighbor distances")
    if not np.isfinite(d).all():
        raise DataError("non-finite neighbor distances")
    if np.any(np.diff(d) < 0):
        raise ArgumentError("neighbor distances must be sorted ascending")
    if target is None:
        target = float(np.log2(d.size))
    if target <= 0:
        raise ArgumentError(f"target must be > 0, got {target}")

    rho = float(d[0])
    # mass is monotone increasing in sigma
    if _membership_mass(d, rho, SIGMA_MIN) >= target:
        return SigmaCalibration(rho, SIGMA_MIN, True)
    if _membership_mass(d, rho, SIGMA_MAX) <= target:
        return SigmaCalibration(rho, SIGMA_MAX, True)

    lo, hi = SIGMA_MIN, SIGMA_MAX
    mid = 1.0
    for _ in range(max_iter):
        mass = _membership_mass(d, rho, mid)
        if abs(mass - target) <= tol:
            return SigmaCalibration(rho, mid, False)
        if mass > target:
            hi = mid
        else:
            lo = mid
        mid = 0.5 * (lo + hi)
    return SigmaCalibration(rho, mid, False)


def calibrate_all(
    graph: NeighborGraph,
    target: float | None = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    """Per-point calibration over a whole neighbor graph.

    Returns (rho, sigma, clamped, target).
    """
    if target is None:
        target = float(np.log2(graph.k))
    n = graph.n
    rho = np.empty(n)
    sigma = np.empty(n)
    clamped = np.zeros(n, dtype=bool)
    for i in range(n):
        rho[i], sigma[i], clamped[i] = calibrate_sigma(
            graph.dists[i], target=target, tol=tol, max_iter=max_iter
        )
    return rho, sigma, clamped, target


def local_strengths(
    graph: NeighborGraph, rho: np.ndarray, sigma: np.ndarray
) -> np.ndarray:
    """Directed memberships v_{j|i}, aligned with graph.ids.

    Exactly 1 where d(i, j) <= rho_i, decaying exponentially beyond.
    """
    return np.exp(-np.maximum(graph.dists - rho[:, None], 0.0) / sigma[:, None])


@dataclass
class FuzzyGraph:
    """Symmetric membership graph stored as upper-triangle triplets."""

    n: int
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray
    rho: np.ndarray
    sigma: np.ndarray
    clamped: np.ndarray
    target: float

    @property
    def n_edges(self) -> int:
        return self.vals.size

    def to_csr(self) -> sp.csr_matrix:
        m = sp.coo_matrix(
            (
                np.concatenate([self.vals, self.vals]),
                (
                    np.concatenate([self.rows, self.cols]),
                    np.concatenate([self.cols, self.rows]),
                ),
            ),
            shape=(self.n, self.n),
        )
        return m.tocsr()

    def weight(self, i: int, j: int) -> float:
        if i > j:
            i, j = j, i
        mask = (self.rows == i) & (self.cols == j)
        idx = np.flatnonzero(mask)
        return float(self.vals[idx[0]]) if idx.size else 0.0

    def edge_set(self) -> set[tuple[int, int]]:
        return set(zip(self.rows.tolist(), self.cols.tolist()))

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "rows": self.rows.tolist(),
            "cols": self.cols.tolist(),
            "vals": self.vals.tolist(),
            "rho": self.rho.tolist(),
            "sigma": self.sigma.tolist(),
            "clamped": self.clamped.astype(int).tolist(),
            "target": self.target,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FuzzyGraph":
        return cls(
            n=int(data["n"]),
            rows=np.asarray(data["rows"], dtype=np.int64),
            cols=np.asarray(data["cols"], dtype=np.int64),
            vals=np.asarray(data["vals"], dtype=np.float64),
            rho=np.asarray(data["rho"], dtype=np.float64),
            sigma=np.asarray(data["sigma"], dtype=np.float64),
            clamped=np.asarray(data["clamped"], dtype=np.int64).astype(bool),
            target=float(data["target"]),
        )


def symmetrize(
    graph: NeighborGraph,
    strengths: np.ndarray,
    rho: np.ndarray,
    sigma: np.ndarray,
    clamped: np.ndarray,
    target: float,
) -> FuzzyGraph:
    """Merge directed strengths into a symmetric graph via the fuzzy union
    v_ij = a + b - a*b; exact zeros are dropped."""
    n = graph.n
    rows = np.repeat(np.arange(n, dtype=np.int64), graph.k)
    cols = graph.ids.ravel().astype(np.int64)
    vals = strengths.ravel().astype(np.float64)

    P = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    support = sp.triu(P + P.T, k=1).tocoo()
    r_all = support.row.astype(np.int64)
    c_all = support.col.astype(np.int64)
    a = np.asarray(P[r_all, c_all]).ravel()
    b = np.asarray(P[c_all, r_all]).ravel()
    # a + b - a*b evaluated as a + b*(1-a): exactly 1 when either side is 1
    union = a + b * (1.0 - a)

    # drop exact zeros and denormal-range weights (numerically no edge)
    keep = union > 1e-300
    r = r_all[keep]
    c = c_all[keep]
    v = np.minimum(union[keep], 1.0)

    order = np.lexsort((c, r))
    return FuzzyGraph(
        n=n,
        rows=r[order],
        cols=c[order],
        vals=v[order],
        rho=np.asarray(rho, dtype=np.float64),
        sigma=np.asarray(sigma, dtype=np.float64),
        clamped=np.asarray(clamped, dtype=bool),
        target=float(target),
    )


def fuzzy_union(a: float, b: float) -> float:
    """Probabilistic t-conorm used for symmetrization."""
    return a + b - a * b


def build_fuzzy_graph(
    graph: NeighborGraph,
    target: float | None = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> FuzzyGraph:
    """Calibrate, compute directed strengths, and symmetrize in one step."""
    rho, sigma, clamped, tgt = calibrate_all(graph, target, tol, max_iter)
    strengths = local_strengths(graph, rho, sigma)
    return symmetrize(graph, strengths, rho, sigma, clamped, tgt)
