"""End-to-end experiment runners.

Four workflows: per-era fits, the (k, epochs) grid search, supervised
projection of one era onto the other's manifold (with or without
time-dependent features), and the random-split validation. Every run can
write a manifest sufficient to replay it bit-identically in deterministic
mode.
"""

from __future__ import annotations

import hashlib
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .encoding import BillEncoder
from .errors import ArgumentError
from .estimator import ManifoldEmbedding
from .fileio import (
    write_embedding_csv,
    write_json,
    write_projection_csv,
    atomic_write_text,
    read_json,
)
from .ingest import load_corpus, record_to_row, split_corpus
from .metrics import AlignmentReport, alignment_report, neighborhood_purity, trustworthiness
from .plotting import PARTY_PALETTE, PlotStyle, color_map_for, panel_svg, scatter_svg
from .projector import EmbeddingModel, ProjectionResult, fit_model, save_model, transform
from .records import Corpus, Era

MANIFEST_VERSION = "1"

# fixed artifact names inside a run directory
MODEL_FILE = "model.json"
EMBEDDING_FILE = "embedding.csv"
PROJECTION_FILE = "projection.csv"
REPORT_FILE = "report.json"
FIGURE_FILE = "figure.svg"
MANIFEST_FILE = "manifest.json"
GRID_METRICS_FILE = "grid_metrics.json"

MAX_GRID_CELLS = 64


@dataclass(frozen=True)
class RunSettings:
    """Hyperparameters for one fit + transform workflow."""

    k: int = 45
    epochs: int = 450
    min_dist: float = 0.1
    dims: int = 2
    metric: str = "euclidean"
    seed: int = 0
    transform_epochs: int = 30
    learning_rate: float = 1.0
    negative_sample_rate: int = 5
    init: str = "spectral"
    spread: float = 1.0

    def reducer_params(self) -> dict:
        return {
            "n_neighbors": self.k,
            "n_components": self.dims,
            "n_epochs": self.epochs,
            "min_dist": self.min_dist,
            "spread": self.spread,
            "metric": self.metric,
            "learning_rate": self.learning_rate,
            "negative_sample_rate": self.negative_sample_rate,
            "init": self.init,
            "random_state": self.seed,
            "transform_epochs": self.transform_epochs,
        }


@dataclass(frozen=True)
class GridSpec:
    """Grid axes plus the hyperparameters held fixed across cells."""

    k_values: tuple[int, ...] = (5, 15, 30, 45)
    epoch_values: tuple[int, ...] = (50, 150, 300, 450)
    min_dist: float = 0.1
    dims: int = 2
    metric: str = "euclidean"
    seed: int = 0

    def __post_init__(self):
        if not self.k_values or not self.epoch_values:
            raise ArgumentError("grid axes must be non-empty")
        if any(k < 1 for k in self.k_values) or any(
            e < 1 for e in self.epoch_values
        ):
            raise ArgumentError("grid values must be positive")
        if len(self.k_values) * len(self.epoch_values) > MAX_GRID_CELLS:
            raise ArgumentError(
                f"grid too large (> {MAX_GRID_CELLS} cells); shrink the axes"
            )


@dataclass
class GridCell:
    k: int
    epochs: int
    coords: np.ndarray | None = None
    metrics: dict = field(default_factory=dict)
    error: str | None = None


@dataclass
class GridResult:
    cells: list[GridCell]
    manifest: dict

    def cell(self, k: int, epochs: int) -> GridCell:
        for c in self.cells:
            if c.k == k and c.epochs == epochs:
                return c
        raise KeyError((k, epochs))

    @property
    def failed(self) -> list[GridCell]:
        return [c for c in self.cells if c.error is not None]


@dataclass
class ExperimentResult:
    model: EmbeddingModel
    projection: ProjectionResult
    report: AlignmentReport
    manifest: dict
    out_dir: Path | None = None


def corpus_fingerprint(corpus: Corpus) -> str:
    h = hashlib.sha256()
    for rec in corpus:
        row = record_to_row(rec)
        h.update("|".join(row[k] for k in sorted(row)).encode("utf-8"))
        h.update(b"\n")
    return h.hexdigest()


def _split_hash(train: Corpus, test: Corpus) -> str:
    h = hashlib.sha256()
    h.update(",".join(sorted(r.bill_id for r in train)).encode("utf-8"))
    h.update(b"||")
    h.update(",".join(sorted(r.bill_id for r in test)).encode("utf-8"))
    return h.hexdigest()


def _party_colors(parties) -> list[str]:
    return [PARTY_PALETTE[p.value] for p in parties]


def _projection_figure(model: EmbeddingModel, projection: ProjectionResult) -> str:
    return scatter_svg(
        reference_coords=model.embedding,
        reference_colors=_party_colors(model.features.party_labels),
        projected_coords=projection.coords,
        projected_colors=_party_colors(projection.party_labels),
        legend=dict(PARTY_PALETTE),
    )


def _resolve_corpus(corpus_or_path) -> tuple[Corpus, str | None]:
    if isinstance(corpus_or_path, (str, Path)):
        return load_corpus(corpus_or_path), str(corpus_or_path)
    return corpus_or_path, None


def _write_experiment_outputs(
    out_dir: Path,
    model: EmbeddingModel,
    projection: ProjectionResult,
    report: AlignmentReport,
    manifest: dict,
) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    save_model(model, out_dir / MODEL_FILE)
    write_embedding_csv(
        out_dir / EMBEDDING_FILE,
        model.embedding,
        model.features.row_ids,
        model.features.party_labels,
        model.features.era_labels,
        split="train",
    )
    write_projection_csv(out_dir / PROJECTION_FILE, projection)
    write_json(out_dir / REPORT_FILE, report.to_dict())
    atomic_write_text(out_dir / FIGURE_FILE, _projection_figure(model, projection))
    write_json(out_dir / MANIFEST_FILE, manifest)


def run_era_experiment(
    corpus_or_path,
    include_time: bool,
    settings: RunSettings = RunSettings(),
    out_dir=None,
) -> ExperimentResult:
    """Fit on the pre-COVID era, project the COVID era onto that manifold.

    ``include_time`` toggles the time-dependent feature columns for both
    the fit and the projection.
    """
    corpus, corpus_path = _resolve_corpus(corpus_or_path)
    counts = corpus.era_counts()
    if min(counts.values()) == 0:
        raise ArgumentError("era experiment needs records from both eras")

    train, test = split_corpus(corpus, "ByEra")
    model = fit_model(train, include_time=include_time, **settings.reducer_params())
    projection = transform(
        model, test, transform_epochs=settings.transform_epochs, seed=settings.seed
    )
    report = alignment_report(model, projection)
    projection.alignment = report

    manifest = {
        "manifest_version": MANIFEST_VERSION,
        "kind": "era",
        "experiment_id": f"era-{'time' if include_time else 'notime'}-"
        f"{corpus_fingerprint(corpus)[:12]}-s{settings.seed}",
        "corpus_path": corpus_path,
        "corpus_sha256": corpus_fingerprint(corpus),
        "split": {"mode": "ByEra", "hash": _split_hash(train, test)},
        "include_time": include_time,
        "settings": asdict(settings),
        "seed": settings.seed,
        "outputs": {
            "model": MODEL_FILE,
            "embedding_csv": EMBEDDING_FILE,
            "projection_csv": PROJECTION_FILE,
            "report": REPORT_FILE,
            "figure": FIGURE_FILE,
        },
    }

    result = ExperimentResult(model, projection, report, manifest)
    if out_dir is not None:
        result.out_dir = Path(out_dir)
        _write_experiment_outputs(result.out_dir, model, projection, report, manifest)
    return result


def run_random_split_experiment(
    corpus_or_path,
    train_fraction: float = 0.66,
    settings: RunSettings = RunSettings(),
    out_dir=None,
) -> ExperimentResult:
    """Validation workflow: stratified random split, time features excluded."""
    corpus, corpus_path = _resolve_corpus(corpus_or_path)
    if len(corpus) == 0:
        raise ArgumentError("corpus is empty")

    train, test = split_corpus(
        corpus, "Random", train_fraction=train_fraction, seed=settings.seed
    )
    if len(test) == 0:
        raise ArgumentError("random split produced an empty test set")
    model = fit_model(train, include_time=False, **settings.reducer_params())
    projection = transform(
        model, test, transform_epochs=settings.transform_epochs, seed=settings.seed
    )
    report = alignment_report(model, projection)
    projection.alignment = report

    manifest = {
        "manifest_version": MANIFEST_VERSION,
        "kind": "random_split",
        "experiment_id": f"random-{corpus_fingerprint(corpus)[:12]}-s{settings.seed}",
        "corpus_path": corpus_path,
        "corpus_sha256": corpus_fingerprint(corpus),
        "split": {
            "mode": "Random",
            "train_fraction": train_fraction,
            "hash": _split_hash(train, test),
        },
        "include_time": False,
        "settings": asdict(settings),
        "seed": settings.seed,
        "outputs": {
            "model": MODEL_FILE,
            "embedding_csv": EMBEDDING_FILE,
            "projection_csv": PROJECTION_FILE,
            "report": REPORT_FILE,
            "figure": FIGURE_FILE,
        },
    }

    result = ExperimentResult(model, projection, report, manifest)
    if out_dir is not None:
        result.out_dir = Path(out_dir)
        _write_experiment_outputs(result.out_dir, model, projection, report, manifest)
    return result


def run_grid(
    corpus_or_path,
    spec: GridSpec = GridSpec(),
    labels=None,
    include_time: bool = True,
    eval_k: int = 10,
    out_dir=None,
) -> GridResult:
    """One fit per (k, epochs) cell over a shared encoding.

    Cells sharing a k value share their neighbor graph work implicitly via
    the estimator; failures are recorded per cell and the grid continues.
    ``labels`` (default: era labels) drive the purity metric.
    """
    corpus, corpus_path = _resolve_corpus(corpus_or_path)
    encoder = BillEncoder(include_time=include_time)
    features = encoder.fit_transform(corpus)
    X = features.values
    if labels is None:
        labels = np.array([e.value for e in features.era_labels])
    else:
        labels = np.asarray(labels)

    cells: list[GridCell] = []
    panels: list[tuple[str, str]] = []
    for k in spec.k_values:
        for epochs in spec.epoch_values:
            cell = GridCell(k=k, epochs=epochs)
            try:
                reducer = ManifoldEmbedding(
                    n_neighbors=k,
                    n_components=spec.dims,
                    n_epochs=epochs,
                    min_dist=spec.min_dist,
                    metric=spec.metric,
                    random_state=spec.seed,
                )
                coords = reducer.fit_transform(X)
                cell.coords = coords
                cell.metrics = {
                    "trustworthiness": trustworthiness(X, coords, k=eval_k),
                    "purity": neighborhood_purity(coords, labels, k=eval_k),
                    "final_loss": reducer.final_loss_,
                }
                label_values = [str(v) for v in labels.tolist()]
                cmap = color_map_for("label", label_values)
                panels.append(
                    (
                        f"k={k}, epochs={epochs}",
                        scatter_svg(
                            reference_coords=coords,
                            reference_colors=[cmap[v] for v in label_values],
                        ),
                    )
                )
            except Exception as exc:
                cell.error = f"{type(exc).__name__}: {exc}"
            cells.append(cell)

    manifest = {
        "manifest_version": MANIFEST_VERSION,
        "kind": "grid",
        "experiment_id": f"grid-{corpus_fingerprint(corpus)[:12]}-s{spec.seed}",
        "corpus_path": corpus_path,
        "corpus_sha256": corpus_fingerprint(corpus),
        "include_time": include_time,
        "grid": {
            "k_values": list(spec.k_values),
            "epoch_values": list(spec.epoch_values),
            "min_dist": spec.min_dist,
            "dims": spec.dims,
            "metric": spec.metric,
        },
        "eval_k": eval_k,
        "seed": spec.seed,
        "outputs": {"figure": FIGURE_FILE, "metrics": GRID_METRICS_FILE},
    }

    result = GridResult(cells=cells, manifest=manifest)
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        if panels:
            atomic_write_text(
                out_dir / FIGURE_FILE,
                panel_svg(panels, n_cols=len(spec.epoch_values)),
            )
        write_json(
            out_dir / GRID_METRICS_FILE,
            {
                "cells": [
                    {
                        "k": c.k,
                        "epochs": c.epochs,
                        "metrics": c.metrics,
                        "error": c.error,
                    }
                    for c in cells
                ]
            },
        )
        write_json(out_dir / MANIFEST_FILE, manifest)
    return result


def replay(manifest_path, out_dir=None):
    """Re-run an experiment from its manifest.

    Requires the manifest to reference the corpus by path. Deterministic
    mode makes the rerun's artifacts byte-identical to the original's.
    """
    manifest = read_json(manifest_path)
    corpus_path = manifest.get("corpus_path")
    if not corpus_path:
        raise ArgumentError(
            "manifest does not record a corpus path; cannot replay"
        )
    kind = manifest.get("kind")
    if kind == "era":
        settings = RunSettings(**manifest["settings"])
        return run_era_experiment(
            corpus_path, manifest["include_time"], settings, out_dir=out_dir
        )
    if kind == "random_split":
        settings = RunSettings(**manifest["settings"])
        return run_random_split_experiment(
            corpus_path,
            train_fraction=manifest["split"]["train_fraction"],
            settings=settings,
            out_dir=out_dir,
        )
    if kind == "grid":
        g = manifest["grid"]
        spec = GridSpec(
            k_values=tuple(g["k_values"]),
            epoch_values=tuple(g["epoch_values"]),
            min_dist=g["min_dist"],
            dims=g["dims"],
            metric=g["metric"],
            seed=manifest["seed"],
        )
        return run_grid(
            corpus_path,
            spec,
            include_time=manifest["include_time"],
            eval_k=manifest["eval_k"],
            out_dir=out_dir,
        )
    raise ArgumentError(f"unknown experiment kind {kind!r}")
