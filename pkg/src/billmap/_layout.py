"""Numba kernels for the stochastic embedding layout.

The serial kernel is bit-reproducible for a fixed seed: edges are visited
in a fixed order and all randomness flows through numba's internal RNG,
seeded once per optimization via :func:`seed_rng`. The parallel kernel
tolerates races on the coordinate array (asynchronous updates) and is
exempt from bit-reproducibility.

Gradient convention: coefficients are d(loss)/d(squared distance) times the
chain-rule factor 2, so the per-coordinate gradient is coeff * (y_i - y_j)
and a descent step subtracts lr * clip(gradient).
"""

from __future__ import annotations

import numba
import numpy as np


@numba.njit(cache=True, inline="always")
def attract_grad_coeff(d2: float, a: float, b: float) -> float:
    """Gradient coefficient of -log(w) for w = 1/(1 + a * d2**b), d2 > 0."""
    return 2.0 * a * b * d2 ** (b - 1.0) / (1.0 + a * d2 ** b)


@numba.njit(cache=True, inline="always")
def repel_grad_coeff(d2: float, a: float, b: float) -> float:
    """Gradient coefficient of -log(1 - w), d2 > 0. Negative: descent repels."""
    return -2.0 * b / (d2 * (1.0 + a * d2 ** b))


@numba.njit(cache=True)
def seed_rng(seed: int) -> None:
    np.random.seed(seed)


@numba.njit(cache=True)
def sgd_epochs(
    head_coords,
    tail_coords,
    heads,
    tails,
    epochs_per_sample,
    next_due,
    epoch_start,
    epoch_end,
    n_total_epochs,
    lr0,
    a,
    b,
    neg_samples,
    same_set,
    clip,
):
    """Run SGD epochs [epoch_start, epoch_end) over a directed edge list.

    Each directed edge fires when its bookkeeping clock comes due (every
    1/weight epochs); the head moves toward the tail, then receives
    ``neg_samples`` repulsive kicks away from uniformly drawn tail points.
    Tail coordinates are never written, so passing the same array as head
    and tail gives the in-sample fit while a frozen training array gives the
    out-of-sample transform.
    """
    n_tail = tail_coords.shape[0]
    dim = head_coords.shape[1]
    n_edges = heads.shape[0]
    for epoch in range(epoch_start, epoch_end):
        lr = lr0 * (1.0 - epoch / n_total_epochs)
        for e in range(n_edges):
            if next_due[e] > epoch:
                continue
            i = heads[e]
            j = tails[e]

            d2 = 0.0
            for t in range(dim):
                diff = head_coords[i, t] - tail_coords[j, t]
                d2 += diff * diff
            if d2 > 0.0:
                coeff = attract_grad_coeff(d2, a, b)
                for t in range(dim):
                    g = coeff * (head_coords[i, t] - tail_coords[j, t])
                    if g > clip:
                        g = clip
                    elif g < -clip:
                        g = -clip
                    head_coords[i, t] -= lr * g

            for _ in range(neg_samples):
                l = np.random.randint(0, n_tail)
                if same_set and l == i:
                    continue
                d2n = 0.0
                for t in range(dim):
                    diff = head_coords[i, t] - tail_coords[l, t]
                    d2n += diff * diff
                if d2n > 1e-12:
                    coeff = repel_grad_coeff(d2n, a, b)
                    for t in range(dim):
                        g = coeff * (head_coords[i, t] - tail_coords[l, t])
                        if g > clip:
                            g = clip
                        elif g < -clip:
                            g = -clip
                        head_coords[i, t] -= lr * g
                else:
                    # coincident points: maximum-size deterministic kick
                    for t in range(dim):
                        head_coords[i, t] += lr * clip

            next_due[e] += epochs_per_sample[e]


@numba.njit(cache=True, parallel=True)
def sgd_epochs_parallel(
    head_coords,
    tail_coords,
    heads,
    tails,
    epochs_per_sample,
    next_due,
    epoch_start,
    epoch_end,
    n_total_epochs,
    lr0,
    a,
    b,
    neg_samples,
    same_set,
    clip,
):
    """Asynchronous variant: edges are partitioned across threads and
    coordinate races are tolerated. Statistically equivalent, not
    bit-reproducible."""
    n_tail = tail_coords.shape[0]
    dim = head_coords.shape[1]
    n_edges = heads.shape[0]
    for epoch in range(epoch_start, epoch_end):
        lr = lr0 * (1.0 - epoch / n_total_epochs)
        for e in numba.prange(n_edges):
            if next_due[e] > epoch:
                continue
            i = heads[e]
            j = tails[e]

            d2 = 0.0
            for t in range(dim):
                diff = head_coords[i, t] - tail_coords[j, t]
                d2 += diff * diff
            if d2 > 0.0:
                coeff = attract_grad_coeff(d2, a, b)
                for t in range(dim):
                    g = coeff * (head_coords[i, t] - tail_coords[j, t])
                    if g > clip:
                        g = clip
                    elif g < -clip:
                        g = -clip
                    head_coords[i, t] -= lr * g

            for _ in range(neg_samples):
                l = np.random.randint(0, n_tail)
                if same_set and l == i:
                    continue
                d2n = 0.0
                for t in range(dim):
                    diff = head_coords[i, t] - tail_coords[l, t]
                    d2n += diff * diff
                if d2n > 1e-12:
                    coeff = repel_grad_coeff(d2n, a, b)
                    for t in range(dim):
                        g = coeff * (head_coords[i, t] - tail_coords[l, t])
                        if g > clip:
                            g = clip
                        elif g < -clip:
                            g = -clip
                        head_coords[i, t] -= lr * g
                else:
                    for t in range(dim):
                        head_coords[i, t] += lr * clip

            next_due[e] += epochs_per_sample[e]
