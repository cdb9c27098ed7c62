"""Encode bill corpora into standardized numeric design matrices.

The encoder is a scikit-learn style transformer: ``fit`` learns categorical
vocabularies and standardization statistics from the training corpus and
``transform`` applies them to any corpus. Categories unseen at fit time map
to all-zero one-hot blocks and are counted in a warning report instead of
erroring, because the COVID era introduces committees and types absent from
earlier congresses.

Party is deliberately never encoded: it is carried alongside the matrix so
plots can condition on it.
"""

from __future__ import annotations

import datetime as dt
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator

from .errors import ArgumentError, ModelFormatError
from .records import BillRecord, Corpus, Era, Party

ENCODER_FORMAT_VERSION = "1"

_EPOCH = dt.date(1970, 1, 1)

# Numeric source fields and whether they monotonically track calendar time.
_NUMERIC_FIELDS = (
    ("cosponsor_count", False),
    ("committee_count", False),
    ("congress", True),
    ("intro_date_days", True),
    ("last_action_date_days", True),
)


def _days(d: dt.date) -> float:
    return float((d - _EPOCH).days)


def _numeric_raw(rec: BillRecord) -> dict[str, float]:
    return {
        "cosponsor_count": float(rec.cosponsor_count),
        "committee_count": float(len(rec.committees)),
        "congress": float(rec.congress),
        "intro_date_days": _days(rec.intro_date),
        "last_action_date_days": _days(rec.last_action_date),
    }


@dataclass(frozen=True)
class ColumnMeta:
    name: str
    kind: str  # "onehot" | "multihot" | "numeric"
    time_dependent: bool


@dataclass
class FeatureMatrix:
    """Encoded design matrix with per-column provenance.

    party_labels and era_labels ride alongside the matrix (never as
    columns); ``unseen`` counts category values that were zeroed because the
    encoder had not seen them at fit time.
    """

    values: np.ndarray
    columns: list[ColumnMeta]
    row_ids: list[str]
    party_labels: list[Party]
    era_labels: list[Era]
    unseen: dict[str, int]

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_columns(self) -> int:
        return self.values.shape[1]

    def column_names(self) -> list[str]:
        return [c.name for c in self.columns]

    def total_unseen(self) -> int:
        return sum(self.unseen.values())


class BillEncoder(BaseEstimator):
    """Fit/transform encoder from corpora to standardized feature matrices.

    Parameters
    ----------
    include_time: when False, no time-dependent column (introduction date,
        final-action date, congress index) is emitted.

    Notes
    -----
    One-hot and multi-hot blocks use vocabularies sorted lexicographically,
    so encoding is order-stable across runs. Numeric columns are
    standardized with training-set statistics only; constant columns
    standardize to all zeros (their stored deviation is 1 to avoid division
    by zero without silently dropping the column).
    """

    def __init__(self, include_time: bool = True):
        self.include_time = include_time

    # -- fitting -----------------------------------------------------------

    def fit(self, corpus: Corpus, y=None) -> "BillEncoder":
        if len(corpus) == 0:
            raise ArgumentError("cannot fit an encoder on an empty corpus")

        self.bill_type_vocab_ = sorted({r.bill_type.value for r in corpus})
        self.chamber_vocab_ = sorted({r.chamber.value for r in corpus})
        self.state_vocab_ = sorted({r.sponsor_state for r in corpus})
        committee_universe: set[str] = set()
        for rec in corpus:
            committee_universe.update(rec.committees)
        self.committee_vocab_ = sorted(committee_universe)

        self.columns_ = self._build_columns()
        raw = self._raw_matrix(corpus)

        means = np.zeros(raw.shape[1])
        stds = np.ones(raw.shape[1])
        for j, col in enumerate(self.columns_):
            if col.kind != "numeric":
                continue
            means[j] = raw[:, j].mean()
            sd = raw[:, j].std()
            stds[j] = sd if sd > 0.0 else 1.0
        self.means_ = means
        self.stds_ = stds
        return self

    def _build_columns(self) -> list[ColumnMeta]:
        cols: list[ColumnMeta] = []
        for v in self.bill_type_vocab_:
            cols.append(ColumnMeta(f"bill_type={v}", "onehot", False))
        for v in self.chamber_vocab_:
            cols.append(ColumnMeta(f"chamber={v}", "onehot", False))
        for v in self.state_vocab_:
            cols.append(ColumnMeta(f"state={v}", "onehot", False))
        for v in self.committee_vocab_:
            cols.append(ColumnMeta(f"committee={v}", "multihot", False))
        for name, time_dep in _NUMERIC_FIELDS:
            if time_dep and not self.include_time:
                continue
            cols.append(ColumnMeta(name, "numeric", time_dep))
        return cols

    # -- encoding ----------------------------------------------------------

    def _raw_matrix(self, corpus: Corpus) -> np.ndarray:
        """Unstandardized matrix; also tallies unseen categories."""
        n = len(corpus)
        p = len(self.columns_)
        out = np.zeros((n, p))
        index = {c.name: j for j, c in enumerate(self.columns_)}
        unseen = {"bill_type": 0, "chamber": 0, "state": 0, "committee": 0}

        for i, rec in enumerate(corpus):
            for prefix, value in (
                ("bill_type", rec.bill_type.value),
                ("chamber", rec.chamber.value),
                ("state", rec.sponsor_state),
            ):
                j = index.get(f"{prefix}={value}")
                if j is None:
                    unseen[prefix] += 1
                else:
                    out[i, j] = 1.0
            for name in rec.committees:
                j = index.get(f"committee={name}")
                if j is None:
                    unseen["committee"] += 1
                else:
                    out[i, j] = 1.0
            numeric = _numeric_raw(rec)
            for name, _ in _NUMERIC_FIELDS:
                j = index.get(name)
                if j is not None:
                    out[i, j] = numeric[name]

        self._last_unseen = {k: v for k, v in unseen.items() if v > 0}
        return out

    def transform(self, corpus: Corpus) -> FeatureMatrix:
        self._check_fitted()
        if len(corpus) == 0:
            raise ArgumentError("cannot encode an empty corpus")
        raw = self._raw_matrix(corpus)
        values = (raw - self.means_) / self.stds_
        # Non-numeric columns have mean 0 / std 1 stored, so the line above
        # leaves one-hot blocks untouched.
        return FeatureMatrix(
            values=values,
            columns=list(self.columns_),
            row_ids=[r.bill_id for r in corpus],
            party_labels=[r.sponsor_party for r in corpus],
            era_labels=[r.era for r in corpus],
            unseen=dict(self._last_unseen),
        )

    def fit_transform(self, corpus: Corpus, y=None) -> FeatureMatrix:
        return self.fit(corpus).transform(corpus)

    def _check_fitted(self):
        if not hasattr(self, "columns_"):
            raise ArgumentError("encoder is not fitted")

    # -- persistence ---------------------------------------------------------

    def to_dict(self) -> dict:
        self._check_fitted()
        return {
            "format_version": ENCODER_FORMAT_VERSION,
            "include_time": self.include_time,
            "bill_type_vocab": self.bill_type_vocab_,
            "chamber_vocab": self.chamber_vocab_,
            "state_vocab": self.state_vocab_,
            "committee_vocab": self.committee_vocab_,
            "means": self.means_.tolist(),
            "stds": self.stds_.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BillEncoder":
        version = data.get("format_version")
        if version != ENCODER_FORMAT_VERSION:
            raise ModelFormatError(
                f"encoder format version {version!r} is not supported "
                f"(expected {ENCODER_FORMAT_VERSION!r})"
            )
        enc = cls(include_time=bool(data["include_time"]))
        enc.bill_type_vocab_ = list(data["bill_type_vocab"])
        enc.chamber_vocab_ = list(data["chamber_vocab"])
        enc.state_vocab_ = list(data["state_vocab"])
        enc.committee_vocab_ = list(data["committee_vocab"])
        enc.columns_ = enc._build_columns()
        enc.means_ = np.asarray(data["means"], dtype=np.float64)
        enc.stds_ = np.asarray(data["stds"], dtype=np.float64)
        return enc

    def save(self, path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8"
        )

    @classmethod
    def load(cls, path) -> "BillEncoder":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ModelFormatError(
                f"corrupt encoder file at byte {exc.pos}: {exc.msg}"
            ) from exc
        return cls.from_dict(data)
