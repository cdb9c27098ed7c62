"""Fitted models over bill corpora and supervised projection of new bills.

An :class:`EmbeddingModel` bundles the fitted encoder, training feature
matrix, and fitted manifold estimator. Persisted models are single JSON
documents written atomically; a reloaded model reproduces transform outputs
bit-identically in deterministic mode.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .encoding import BillEncoder, FeatureMatrix
from .errors import ArgumentError, ModelCompatibilityError, ModelFormatError
from .estimator import ManifoldEmbedding
from .records import Corpus, Era, Party

MODEL_FORMAT_VERSION = "1"


@dataclass
class EmbeddingModel:
    encoder: BillEncoder
    features: FeatureMatrix
    reducer: ManifoldEmbedding
    format_version: str = MODEL_FORMAT_VERSION

    @property
    def n_training(self) -> int:
        return self.features.n_rows

    @property
    def embedding(self) -> np.ndarray:
        return self.reducer.embedding_


@dataclass
class ProjectionResult:
    """Coordinates and diagnostics for projected records."""

    coords: np.ndarray
    nearest_train_dist: np.ndarray
    row_ids: list[str]
    party_labels: list[Party]
    era_labels: list[Era]
    unseen: dict[str, int]
    alignment: object | None = field(default=None, compare=False)

    @property
    def n_rows(self) -> int:
        return self.coords.shape[0]

    def total_unseen(self) -> int:
        return sum(self.unseen.values())


def fit_model(
    corpus: Corpus,
    include_time: bool = True,
    **reducer_params,
) -> EmbeddingModel:
    """Fit encoder and manifold on a training corpus."""
    encoder = BillEncoder(include_time=include_time)
    features = encoder.fit_transform(corpus)
    reducer = ManifoldEmbedding(**reducer_params)
    reducer.fit(features.values)
    return EmbeddingModel(encoder=encoder, features=features, reducer=reducer)


def transform(
    model: EmbeddingModel,
    new_records: Corpus,
    transform_epochs: int | None = None,
    seed: int | None = None,
) -> ProjectionResult:
    """Project new bills onto the model's frozen training embedding.

    New records are encoded with the training encoder (training statistics;
    unseen categories zero their block and are counted), matched to nearest
    training points in feature space, initialized at the membership-weighted
    mean of those neighbors' embedding coordinates, then refined by SGD with
    training coordinates frozen.
    """
    if len(new_records) == 0:
        raise ArgumentError("cannot transform an empty corpus")
    fm = model.encoder.transform(new_records)
    if fm.n_columns != model.features.n_columns:
        raise ModelCompatibilityError(
            f"encoder produced {fm.n_columns} columns but the model was "
            f"trained with {model.features.n_columns}"
        )
    proj = model.reducer.project(
        fm.values, transform_epochs=transform_epochs, seed=seed
    )
    return ProjectionResult(
        coords=proj.coords,
        nearest_train_dist=proj.nearest_train_dist,
        row_ids=fm.row_ids,
        party_labels=fm.party_labels,
        era_labels=fm.era_labels,
        unseen=fm.unseen,
    )


# ---------------------------------------------------------------------------
# Persistence


def _feature_matrix_to_dict(fm: FeatureMatrix) -> dict:
    return {
        "values": fm.values.tolist(),
        "columns": [
            {"name": c.name, "kind": c.kind, "time_dependent": c.time_dependent}
            for c in fm.columns
        ],
        "row_ids": fm.row_ids,
        "party_labels": [p.value for p in fm.party_labels],
        "era_labels": [e.value for e in fm.era_labels],
        "unseen": fm.unseen,
    }


def _feature_matrix_from_dict(data: dict) -> FeatureMatrix:
    from .encoding import ColumnMeta

    return FeatureMatrix(
        values=np.asarray(data["values"], dtype=np.float64),
        columns=[
            ColumnMeta(c["name"], c["kind"], bool(c["time_dependent"]))
            for c in data["columns"]
        ],
        row_ids=list(data["row_ids"]),
        party_labels=[Party(p) for p in data["party_labels"]],
        era_labels=[Era(e) for e in data["era_labels"]],
        unseen=dict(data["unseen"]),
    )


def save_model(model: EmbeddingModel, path) -> None:
    """Atomic JSON persistence: write to a temp file, then rename."""
    path = Path(path)
    doc = {
        "format_version": model.format_version,
        "encoder": model.encoder.to_dict(),
        "features": _feature_matrix_to_dict(model.features),
        "reducer": model.reducer.to_dict(),
    }
    fd, tmp_name = tempfile.mkstemp(
        dir=path.parent, prefix=path.name, suffix=".tmp"
    )
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(doc, fh)
            fh.write("\n")
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def load_model(path) -> EmbeddingModel:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ModelFormatError(
            f"corrupt model file {path}: {exc.msg} at byte {exc.pos}"
        ) from exc
    version = doc.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise ModelFormatError(
            f"model format version {version!r} is not supported "
            f"(expected {MODEL_FORMAT_VERSION!r})"
        )
    return EmbeddingModel(
        encoder=BillEncoder.from_dict(doc["encoder"]),
        features=_feature_matrix_from_dict(doc["features"]),
        reducer=ManifoldEmbedding.from_dict(doc["reducer"]),
        format_version=version,
    )
