"""Brute-force reference implementations and synthetic data, for tests only.

Nothing here is imported by production modules; the dependency points the
other way so oracle agreement is a meaningful check. Guards on input sizes
keep the test suite fast.
"""

from __future__ import annotations

import datetime as dt
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ArgumentError
from .fuzzy import FuzzyGraph
from .neighbors import NeighborGraph
from .optim import LowDimKernel, kernel_target_curve
from .records import BillRecord, BillType, Chamber, Corpus, Party

_EPS = 1e-12


# ---------------------------------------------------------------------------
# Distances (independent of neighbors.pairwise_distances)


def _dist(x: np.ndarray, y: np.ndarray, metric: str) -> float:
    if metric == "euclidean":
        return float(np.sqrt(((x - y) ** 2).sum()))
    if metric == "manhattan":
        return float(np.abs(x - y).sum())
    if metric == "cosine":
        nx = float(np.sqrt((x * x).sum()))
        ny = float(np.sqrt((y * y).sum()))
        if nx == 0.0 or ny == 0.0:
            return 1.0
        return max(0.0, 1.0 - float((x * y).sum()) / (nx * ny))
    raise ArgumentError(f"unknown metric {metric!r}")


def dense_knn(X, k: int, metric: str = "euclidean") -> NeighborGraph:
    """All-pairs sort kNN; exact by construction. Guarded to n <= 2000."""
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if n > 2000:
        raise ArgumentError("dense_knn guard: n must be <= 2000")
    if not 1 <= k < n:
        raise ArgumentError(f"need 1 <= k < n, got k={k}, n={n}")

    ids = np.empty((n, k), dtype=np.int64)
    dists = np.empty((n, k), dtype=np.float64)
    for i in range(n):
        pairs = sorted(
            (( _dist(X[i], X[j], metric), j) for j in range(n) if j != i),
        )
        for pos in range(k):
            dists[i, pos] = pairs[pos][0]
            ids[i, pos] = pairs[pos][1]
    return NeighborGraph(k=k, ids=ids, dists=dists, metric=metric)


def dense_cross_entropy(
    graph: FuzzyGraph, coords: np.ndarray, kernel: LowDimKernel
) -> float:
    """Full O(n^2) cross-entropy, each unordered pair once, logs clamped at
    1e-12. Guarded to n <= 500."""
    coords = np.asarray(coords, dtype=np.float64)
    n = graph.n
    if n > 500:
        raise ArgumentError("dense_cross_entropy guard: n must be <= 500")

    v_lookup = {}
    for r, c, v in zip(graph.rows, graph.cols, graph.vals):
        v_lookup[(int(r), int(c))] = float(v)

    a, b = kernel.a, kernel.b
    total = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            d2 = float(((coords[i] - coords[j]) ** 2).sum())
            w = 1.0 / (1.0 + a * d2**b)
            v = v_lookup.get((i, j), 0.0)
            if v > 0.0:
                total += v * (np.log(max(v, _EPS)) - np.log(max(w, _EPS)))
            if v < 1.0:
                total += (1.0 - v) * (
                    np.log(max(1.0 - v, _EPS)) - np.log(max(1.0 - w, _EPS))
                )
    return float(total)


def finite_difference_gradient(loss_fn, coords: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Central finite differences of a scalar loss over coordinates."""
    coords = np.asarray(coords, dtype=np.float64)
    grad = np.zeros_like(coords)
    for i in range(coords.shape[0]):
        for t in range(coords.shape[1]):
            bumped = coords.copy()
            bumped[i, t] += h
            up = loss_fn(bumped)
            bumped[i, t] -= 2 * h
            down = loss_fn(bumped)
            grad[i, t] = (up - down) / (2 * h)
    return grad


def direct_trustworthiness(X, coords, k: int, metric: str = "euclidean") -> float:
    """Set-based trustworthiness straight from the definition."""
    X = np.asarray(X, dtype=np.float64)
    coords = np.asarray(coords, dtype=np.float64)
    n = X.shape[0]

    def knn_set(M, i, count, m):
        pairs = sorted(((_dist(M[i], M[j], m), j) for j in range(n) if j != i))
        return [j for _, j in pairs[:count]]

    penalty = 0
    for i in range(n):
        rank_order = knn_set(X, i, n - 1, metric)
        rank_of = {j: r + 1 for r, j in enumerate(rank_order)}
        x_neighbors = set(rank_order[:k])
        y_neighbors = knn_set(coords, i, k, "euclidean")
        for j in y_neighbors:
            if j not in x_neighbors:
                penalty += rank_of[j] - k
    if penalty == 0:
        return 1.0
    return 1.0 - 2.0 * penalty / (n * k * (2 * n - 3 * k - 1))


def least_squares_kernel_fit(
    min_dist: float, spread: float, grid: int = 60, refine: int = 40
) -> tuple[float, float]:
    """Independent generic curve fitter: coarse grid search over (a, b)
    followed by coordinate-descent refinement of the squared error."""
    xv = np.linspace(0.0, spread * 3.0, 300)
    yv = kernel_target_curve(xv, min_dist, spread)

    def sse(a, b):
        w = 1.0 / (1.0 + a * xv ** (2.0 * b))
        return float(((w - yv) ** 2).sum())

    best = (np.inf, 1.0, 1.0)
    for a in np.geomspace(0.01, 20.0, grid):
        for b in np.linspace(0.1, 3.0, grid):
            err = sse(a, b)
            if err < best[0]:
                best = (err, a, b)
    _, a, b = best
    # coordinate descent, multiplicative in a, additive in b
    factor_a, step_b = 1.2, 0.05
    for _ in range(refine):
        improved = False
        for na, nb in ((a * factor_a, b), (a / factor_a, b), (a, b + step_b), (a, b - step_b)):
            if na <= 0 or nb <= 0:
                continue
            if sse(na, nb) < sse(a, b):
                a, b = na, nb
                improved = True
        if not improved:
            factor_a = 1.0 + (factor_a - 1.0) * 0.5
            step_b *= 0.5
    return a, b


# ---------------------------------------------------------------------------
# Synthetic corpus generation

_STATE_POOL = [
    "AL", "AK", "AZ", "AR", "CA", "CO", "CT", "DE", "FL", "GA",
    "HI", "ID", "IL", "IN", "IA", "KS", "KY", "LA", "ME", "MD",
    "MA", "MI", "MN", "MS", "MO", "MT", "NE", "NV", "NH", "NJ",
]

_COMMITTEE_POOL = [
    "energy and commerce", "ways and means", "education and labor",
    "oversight and reform", "appropriations", "judiciary",
    "foreign affairs", "armed services", "agriculture",
    "veterans affairs", "small business", "budget",
]

_ACTION_TEXTS = [
    "Referred to committee.",
    "Read twice and referred to committee on the epidemic response.",
    "Reported by committee.",
    "Passed chamber by voice vote.",
    "Became public law.",
]

_EPOCH = dt.date(1970, 1, 1)
_PRE_START = dt.date(1973, 1, 3)
_PRE_END = dt.date(2018, 12, 31)
_COVID_START = dt.date(2019, 1, 3)
_COVID_END = dt.date(2020, 12, 31)


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a schema-faithful synthetic corpus.

    Blob structure is shared across eras (each blob has its own slice of
    states and committees plus a distinct cosponsor level scaled by
    ``separation``), while ``time_signal`` controls how strongly the date
    fields separate the eras: 0 makes date distributions identical across
    eras, 1 confines dates to their own era's window, and larger values
    shrink each era's window around its center so the gap dominates.
    """

    n_pre: int = 300
    n_covid: int = 150
    n_blobs: int = 3
    separation: float = 6.0
    n_states: int = 12
    n_committees: int = 9
    time_signal: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_blobs < 1 or self.n_pre < 1 or self.n_covid < 0:
            raise ArgumentError("invalid synthetic spec sizes")
        if self.n_states > len(_STATE_POOL):
            raise ArgumentError(f"n_states must be <= {len(_STATE_POOL)}")
        if self.n_committees > len(_COMMITTEE_POOL):
            raise ArgumentError(f"n_committees must be <= {len(_COMMITTEE_POOL)}")
        if self.time_signal < 0:
            raise ArgumentError("time_signal must be >= 0")


def blob_of(bill_id: str) -> int:
    """Recover the generator's blob assignment from a synthetic bill id."""
    return int(bill_id.split("-")[2][1:])


def _window_days(start: dt.date, end: dt.date, tighten: float) -> tuple[float, float]:
    lo = float((start - _EPOCH).days)
    hi = float((end - _EPOCH).days)
    if tighten <= 1.0:
        return lo, hi
    center = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo) / tighten
    return center - half, center + half


def _congress_for(date: dt.date) -> int:
    return min(115, 93 + (date.year - 1973) // 2)


def generate_corpus(spec: SyntheticSpec) -> Corpus:
    """Seeded synthetic corpus satisfying all record invariants.

    Era sizes are exact; the blob assignment is embedded in each bill id
    (parse with :func:`blob_of`).
    """
    rng = np.random.default_rng(spec.seed)
    states_per_blob = max(1, spec.n_states // spec.n_blobs)
    committees_per_blob = max(1, spec.n_committees // spec.n_blobs)
    t = min(spec.time_signal, 1.0)
    global_lo = float((_PRE_START - _EPOCH).days)
    global_hi = float((_COVID_END - _EPOCH).days)
    # blobs bleed into each other as separation drops: this probability sends
    # a record's categorical draws to the global pool instead of its blob's
    p_cross = 1.0 / (1.0 + spec.separation)

    records: list[BillRecord] = []
    eras = [("pre", spec.n_pre), ("cov", spec.n_covid)]
    for era_code, n_era in eras:
        if era_code == "pre":
            win = _window_days(_PRE_START, _PRE_END, spec.time_signal)
        else:
            win = _window_days(_COVID_START, _COVID_END, spec.time_signal)
        for idx in range(n_era):
            blob = idx % spec.n_blobs
            if rng.random() < p_cross:
                states = _STATE_POOL[: spec.n_states]
            else:
                s0 = (blob * states_per_blob) % spec.n_states
                states = [
                    _STATE_POOL[(s0 + off) % spec.n_states]
                    for off in range(states_per_blob)
                ]
            if rng.random() < p_cross:
                committees_pool = _COMMITTEE_POOL[: spec.n_committees]
            else:
                c0 = (blob * committees_per_blob) % spec.n_committees
                committees_pool = [
                    _COMMITTEE_POOL[(c0 + off) % spec.n_committees]
                    for off in range(committees_per_blob)
                ]

            era_days = rng.uniform(win[0], win[1])
            mixed_days = (1.0 - t) * rng.uniform(global_lo, global_hi) + t * era_days
            intro = _EPOCH + dt.timedelta(days=int(round(mixed_days)))

            if era_code == "cov":
                congress = 116
            else:
                congress = _congress_for(intro)

            chamber = Chamber.HOUSE if rng.random() < 0.6 else Chamber.SENATE
            n_committees_bill = int(rng.integers(1, committees_per_blob + 1))
            committees = frozenset(
                str(c)
                for c in rng.choice(
                    committees_pool, size=n_committees_bill, replace=False
                )
            )
            cosponsors = max(
                0, int(round(blob * spec.separation * 5 + rng.normal(0.0, 2.0)))
            )
            action_gap = int(rng.integers(0, 400))
            last_action = intro + dt.timedelta(days=action_gap)

            records.append(
                BillRecord(
                    bill_id=f"SYN-{era_code}-b{blob}-{idx:05d}",
                    chamber=chamber,
                    bill_type=list(BillType)[int(rng.integers(0, 4))],
                    congress=congress,
                    intro_date=intro,
                    sponsor_party=list(Party)[int(rng.integers(0, 3))],
                    sponsor_state=str(rng.choice(states)),
                    sponsor_district=0
                    if chamber is Chamber.SENATE
                    else int(rng.integers(1, 30)),
                    cosponsor_count=cosponsors,
                    committees=committees,
                    last_action_date=last_action,
                    last_action_text=str(rng.choice(_ACTION_TEXTS)),
                )
            )

    return Corpus(
        records=tuple(records),
        source_manifest=(f"synthetic:seed={spec.seed}",),
    )


def blob_labels(corpus: Corpus) -> np.ndarray:
    return np.array([blob_of(r.bill_id) for r in corpus], dtype=np.int64)


def write_fixture_pages(corpus: Corpus, directory, page_size: int = 5) -> list[Path]:
    """Write a corpus as numbered JSON catalog pages for the fixture client."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths: list[Path] = []
    records = list(corpus)
    for page_idx in range(0, len(records), page_size):
        page = records[page_idx : page_idx + page_size]
        objs = [
            {
                "bill_id": r.bill_id,
                "chamber": r.chamber.value,
                "bill_type": r.bill_type.value,
                "congress": r.congress,
                "intro_date": r.intro_date.isoformat(),
                "sponsor_party": r.sponsor_party.value,
                "sponsor_state": r.sponsor_state,
                "sponsor_district": r.sponsor_district,
                "cosponsor_count": r.cosponsor_count,
                "committees": sorted(r.committees),
                "last_action_date": r.last_action_date.isoformat(),
                "last_action_text": r.last_action_text,
            }
            for r in page
        ]
        path = directory / f"page-{page_idx // page_size:04d}.json"
        path.write_text(json.dumps(objs, indent=1) + "\n", encoding="utf-8")
        paths.append(path)
    return paths
