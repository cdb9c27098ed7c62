"""Command-line interface.

Subcommands: ingest, fit, transform, grid, eval, plot. Flag values resolve
against an optional TOML/JSON config file (flags win over the file, the
file wins over defaults) and the fully resolved configuration is echoed
into each run's manifest. Exit codes: 1 data errors, 2 argument errors,
3 numeric errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .errors import ArgumentError, BillmapError
from .experiments import (
    EMBEDDING_FILE,
    MANIFEST_FILE,
    MODEL_FILE,
    GridSpec,
    RunSettings,
    corpus_fingerprint,
    run_grid,
)
from .fileio import (
    atomic_write_text,
    read_matrix_csv,
    read_points_csv,
    write_embedding_csv,
    write_json,
    write_projection_csv,
)
from .ingest import ClientConfig, CatalogQuery, fetch_bills, load_corpus, save_corpus
from .metrics import alignment_report, neighborhood_purity, trustworthiness
from .plotting import PlotStyle, color_map_for, scatter_svg
from .projector import fit_model, load_model, save_model, transform
from .records import DEFAULT_CONGRESS_RANGE


def _load_config_file(path: str) -> dict:
    p = Path(path)
    if not p.exists():
        raise ArgumentError(f"config file {p} does not exist")
    if p.suffix.lower() == ".json":
        return json.loads(p.read_text(encoding="utf-8"))
    try:
        import tomllib
    except ModuleNotFoundError:  # Python 3.10
        import tomli as tomllib
    with open(p, "rb") as fh:
        return tomllib.load(fh)


class _Resolver:
    """flags > config file > defaults; records the resolved values."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.config = _load_config_file(args.config) if args.config else {}
        self.resolved: dict = {}

    def get(self, key: str, default):
        value = getattr(self.args, key, None)
        if value is None:
            value = self.config.get(key, default)
        self.resolved[key] = value
        return value


def _positive_int(resolver: _Resolver, key: str, default: int, flag: str) -> int:
    value = int(resolver.get(key, default))
    if value < 1:
        raise ArgumentError(f"{flag} must be a positive integer, got {value}")
    return value


def _settings_from(resolver: _Resolver) -> RunSettings:
    return RunSettings(
        k=_positive_int(resolver, "k", 45, "--k"),
        epochs=_positive_int(resolver, "epochs", 450, "--epochs"),
        min_dist=float(resolver.get("min_dist", 0.1)),
        dims=_positive_int(resolver, "dims", 2, "--dims"),
        metric=str(resolver.get("metric", "euclidean")),
        seed=int(resolver.get("seed", 0)),
        transform_epochs=int(resolver.get("transform_epochs", 30)),
    )


def _require(resolver: _Resolver, key: str, flag: str) -> str:
    value = resolver.get(key, None)
    if value is None:
        raise ArgumentError(f"{flag} is required")
    return str(value)


# ---------------------------------------------------------------------------
# Subcommands


def cmd_ingest(args) -> int:
    resolver = _Resolver(args)
    out_dir = Path(_require(resolver, "out_dir", "--out-dir"))
    fixtures = resolver.get("fixtures", None)
    input_path = resolver.get("input", None)
    if (fixtures is None) == (input_path is None):
        raise ArgumentError("provide exactly one of --input or --fixtures")

    if fixtures is not None:
        query = CatalogQuery(
            congress_min=int(resolver.get("congress_min", DEFAULT_CONGRESS_RANGE[0])),
            congress_max=int(resolver.get("congress_max", DEFAULT_CONGRESS_RANGE[1])),
            keyword=resolver.get("keyword", None),
        )
        corpus = fetch_bills(ClientConfig(fixture_dir=str(fixtures)), query)
    else:
        mode = "skip" if resolver.get("skip_bad_rows", False) else "raise"
        corpus = load_corpus(input_path, errors=mode)
        for err in corpus.row_errors:
            print(f"skipped {err}", file=sys.stderr)

    out_dir.mkdir(parents=True, exist_ok=True)
    save_corpus(corpus, out_dir / "corpus.csv")
    counts = corpus.era_counts()
    print(
        f"ingested {len(corpus)} records "
        f"(PreCovid={counts['PreCovid']}, Covid={counts['Covid']}, "
        f"skipped={len(corpus.row_errors)})"
    )
    return 0


def cmd_fit(args) -> int:
    resolver = _Resolver(args)
    input_path = _require(resolver, "input", "--input")
    out_dir = Path(_require(resolver, "out_dir", "--out-dir"))
    settings = _settings_from(resolver)
    exclude_time = bool(resolver.get("exclude_time_features", False))

    trace_interval = resolver.get("loss_trace", None)
    reducer_params = settings.reducer_params()
    if trace_interval is not None:
        trace_interval = int(trace_interval)
        if trace_interval < 1:
            raise ArgumentError("--loss-trace must be a positive epoch interval")
        reducer_params["loss_trace_interval"] = trace_interval

    corpus = load_corpus(input_path)
    model = fit_model(corpus, include_time=not exclude_time, **reducer_params)

    out_dir.mkdir(parents=True, exist_ok=True)
    if trace_interval is not None:
        trace_lines = ["epoch,loss"] + [
            f"{epoch},{repr(loss)}" for epoch, loss in model.reducer.loss_trace_
        ]
        atomic_write_text(out_dir / "loss_trace.csv", "\n".join(trace_lines) + "\n")
    save_model(model, out_dir / MODEL_FILE)
    write_embedding_csv(
        out_dir / EMBEDDING_FILE,
        model.embedding,
        model.features.row_ids,
        model.features.party_labels,
        model.features.era_labels,
        split="train",
    )
    manifest = {
        "kind": "fit",
        "corpus_path": str(input_path),
        "corpus_sha256": corpus_fingerprint(corpus),
        "include_time": not exclude_time,
        "settings": resolver.resolved,
        "outputs": {"model": MODEL_FILE, "embedding_csv": EMBEDDING_FILE},
    }
    write_json(out_dir / MANIFEST_FILE, manifest)
    print(f"fit {len(corpus)} records -> {out_dir / MODEL_FILE}")
    return 0


def cmd_transform(args) -> int:
    resolver = _Resolver(args)
    model_path = _require(resolver, "model", "--model")
    input_path = _require(resolver, "input", "--input")
    out_dir = Path(_require(resolver, "out_dir", "--out-dir"))
    transform_epochs = int(resolver.get("transform_epochs", 30))
    seed = resolver.get("seed", None)

    model = load_model(model_path)
    corpus = load_corpus(input_path)
    projection = transform(
        model,
        corpus,
        transform_epochs=transform_epochs,
        seed=int(seed) if seed is not None else None,
    )
    report = alignment_report(model, projection)

    out_dir.mkdir(parents=True, exist_ok=True)
    write_projection_csv(out_dir / "projection.csv", projection)
    write_json(out_dir / "report.json", report.to_dict())
    if projection.total_unseen() > 0:
        blocks = ", ".join(
            f"{name}={count}" for name, count in sorted(projection.unseen.items())
        )
        print(
            f"warning: {projection.total_unseen()} unseen category values "
            f"zeroed ({blocks})",
            file=sys.stderr,
        )
    print(f"projected {projection.n_rows} records -> {out_dir / 'projection.csv'}")
    print(report.to_text())
    return 0


def cmd_grid(args) -> int:
    resolver = _Resolver(args)
    input_path = _require(resolver, "input", "--input")
    out_dir = Path(_require(resolver, "out_dir", "--out-dir"))

    def int_list(key: str, default: str, flag: str) -> tuple[int, ...]:
        raw = str(resolver.get(key, default))
        try:
            values = tuple(int(v) for v in raw.split(",") if v.strip())
        except ValueError:
            raise ArgumentError(f"{flag} must be a comma-separated integer list")
        if not values:
            raise ArgumentError(f"{flag} must be non-empty")
        return values

    spec = GridSpec(
        k_values=int_list("k_values", "5,15,30,45", "--k-values"),
        epoch_values=int_list("epoch_values", "50,150,300,450", "--epoch-values"),
        min_dist=float(resolver.get("min_dist", 0.1)),
        dims=_positive_int(resolver, "dims", 2, "--dims"),
        metric=str(resolver.get("metric", "euclidean")),
        seed=int(resolver.get("seed", 0)),
    )
    exclude_time = bool(resolver.get("exclude_time_features", False))

    result = run_grid(
        input_path,
        spec,
        include_time=not exclude_time,
        eval_k=int(resolver.get("eval_k", 10)),
        out_dir=out_dir,
    )

    print(f"{'k':>5} {'epochs':>7} {'status':>8} {'purity':>8} {'trust':>8}")
    for cell in result.cells:
        if cell.error is None:
            print(
                f"{cell.k:>5} {cell.epochs:>7} {'ok':>8} "
                f"{cell.metrics['purity']:>8.4f} "
                f"{cell.metrics['trustworthiness']:>8.4f}"
            )
        else:
            print(f"{cell.k:>5} {cell.epochs:>7} {'FAILED':>8} {cell.error}")
    if result.failed:
        print(f"error: {len(result.failed)} grid cell(s) failed", file=sys.stderr)
        return 1
    return 0


def cmd_eval(args) -> int:
    resolver = _Resolver(args)
    k = _positive_int(resolver, "k", 10, "--k")
    model_path = resolver.get("model", None)
    matrix_path = resolver.get("matrix", None)
    embedding_path = resolver.get("embedding", None)

    if model_path is not None:
        model = load_model(model_path)
        X = model.features.values
        coords = model.embedding
        labels = np.array([e.value for e in model.features.era_labels])
        metric = model.reducer.metric
    elif matrix_path is not None and embedding_path is not None:
        X = read_matrix_csv(matrix_path)
        coords = read_points_csv(embedding_path)["coords"]
        labels = None
        metric = "euclidean"
    else:
        raise ArgumentError("provide --model, or both --matrix and --embedding")

    t = trustworthiness(X, coords, k=k, metric=metric)
    print(f"trustworthiness: {t:.4f}")
    if labels is not None and np.unique(labels).size > 1:
        p = neighborhood_purity(coords, labels, k=k)
        print(f"era purity: {p:.4f}")
    return 0


def cmd_plot(args) -> int:
    resolver = _Resolver(args)
    embedding_path = _require(resolver, "embedding", "--embedding")
    out_path = _require(resolver, "out", "--out")
    color_by = str(resolver.get("color_by", "party"))
    marker_by = str(resolver.get("marker_by", "split"))
    if color_by not in ("party", "era", "label"):
        raise ArgumentError(f"--color-by must be party, era, or label, got {color_by!r}")
    if marker_by != "split":
        raise ArgumentError(f"--marker-by only supports 'split', got {marker_by!r}")

    data = read_points_csv(embedding_path)
    projection_path = resolver.get("projection", None)
    proj = read_points_csv(projection_path) if projection_path else None

    def values_of(block: dict) -> list[str]:
        if color_by not in block:
            raise ArgumentError(
                f"color-by column {color_by!r} not present in input CSV"
            )
        return [str(v) for v in block[color_by]]

    ref_values = values_of(data)
    all_values = list(ref_values)
    if proj is not None:
        all_values += values_of(proj)
    cmap = color_map_for(color_by, all_values)

    def colors_for(values: list[str]) -> list[str]:
        return [cmap.get(v, "#444444") for v in values]

    ref_coords = data["coords"]
    ref_colors = colors_for(ref_values)
    proj_coords = proj["coords"] if proj is not None else None
    proj_colors = colors_for(values_of(proj)) if proj is not None else None

    # a single CSV can carry both markers via its split column
    if proj is None and "split" in data:
        split = np.array(data["split"])
        is_proj = split == "projected"
        if is_proj.any():
            proj_coords = ref_coords[is_proj]
            proj_colors = [c for c, m in zip(ref_colors, is_proj) if m]
            ref_coords = ref_coords[~is_proj]
            ref_colors = [c for c, m in zip(ref_colors, is_proj) if not m]

    used = sorted(set(all_values))
    legend = {v: cmap[v] for v in used if v in cmap}
    svg = scatter_svg(
        reference_coords=ref_coords,
        reference_colors=ref_colors,
        projected_coords=proj_coords,
        projected_colors=proj_colors,
        legend=legend,
        style=PlotStyle(show_axes=bool(resolver.get("show_axes", False))),
    )
    atomic_write_text(out_path, svg)
    print(f"wrote {out_path}")
    return 0


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="billmap",
        description="Manifold learning over legislative bill metadata.",
    )
    sub = parser.add_subparsers(dest="command")

    def add_common(p):
        p.add_argument("--config", help="TOML or JSON config file")
        p.add_argument("--seed", type=int, default=None)

    p_ingest = sub.add_parser("ingest", help="load/validate a corpus or fixtures")
    add_common(p_ingest)
    p_ingest.add_argument("--input")
    p_ingest.add_argument("--fixtures")
    p_ingest.add_argument("--congress-min", dest="congress_min", type=int)
    p_ingest.add_argument("--congress-max", dest="congress_max", type=int)
    p_ingest.add_argument("--keyword")
    p_ingest.add_argument(
        "--skip-bad-rows",
        dest="skip_bad_rows",
        action="store_const",
        const=True,
        default=None,
    )
    p_ingest.add_argument("--out-dir", dest="out_dir")
    p_ingest.set_defaults(func=cmd_ingest)

    p_fit = sub.add_parser("fit", help="fit an embedding model on a corpus")
    add_common(p_fit)
    p_fit.add_argument("--input")
    p_fit.add_argument("--k", type=int, default=None)
    p_fit.add_argument("--epochs", type=int, default=None)
    p_fit.add_argument("--min-dist", dest="min_dist", type=float, default=None)
    p_fit.add_argument("--dims", type=int, default=None)
    p_fit.add_argument("--metric", choices=("euclidean", "manhattan", "cosine"))
    p_fit.add_argument(
        "--exclude-time-features",
        dest="exclude_time_features",
        action="store_const",
        const=True,
        default=None,
    )
    p_fit.add_argument(
        "--loss-trace",
        dest="loss_trace",
        type=int,
        default=None,
        metavar="EPOCHS",
        help="record a sampled loss estimate every EPOCHS epochs",
    )
    p_fit.add_argument("--out-dir", dest="out_dir")
    p_fit.set_defaults(func=cmd_fit)

    p_tr = sub.add_parser("transform", help="project new bills onto a model")
    add_common(p_tr)
    p_tr.add_argument("--model")
    p_tr.add_argument("--input")
    p_tr.add_argument(
        "--transform-epochs", dest="transform_epochs", type=int, default=None
    )
    p_tr.add_argument("--out-dir", dest="out_dir")
    p_tr.set_defaults(func=cmd_transform)

    p_grid = sub.add_parser("grid", help="hyperparameter grid search")
    add_common(p_grid)
    p_grid.add_argument("--input")
    p_grid.add_argument("--k-values", dest="k_values")
    p_grid.add_argument("--epoch-values", dest="epoch_values")
    p_grid.add_argument("--min-dist", dest="min_dist", type=float, default=None)
    p_grid.add_argument("--dims", type=int, default=None)
    p_grid.add_argument("--metric", choices=("euclidean", "manhattan", "cosine"))
    p_grid.add_argument("--eval-k", dest="eval_k", type=int, default=None)
    p_grid.add_argument(
        "--exclude-time-features",
        dest="exclude_time_features",
        action="store_const",
        const=True,
        default=None,
    )
    p_grid.add_argument("--out-dir", dest="out_dir")
    p_grid.set_defaults(func=cmd_grid)

    p_eval = sub.add_parser("eval", help="embedding quality metrics")
    add_common(p_eval)
    p_eval.add_argument("--model")
    p_eval.add_argument("--matrix")
    p_eval.add_argument("--embedding")
    p_eval.add_argument("--k", type=int, default=None)
    p_eval.set_defaults(func=cmd_eval)

    p_plot = sub.add_parser("plot", help="deterministic SVG scatter")
    add_common(p_plot)
    p_plot.add_argument("--embedding")
    p_plot.add_argument("--projection")
    p_plot.add_argument("--color-by", dest="color_by")
    p_plot.add_argument("--marker-by", dest="marker_by")
    p_plot.add_argument(
        "--show-axes",
        dest="show_axes",
        action="store_const",
        const=True,
        default=None,
    )
    p_plot.add_argument("--out")
    p_plot.set_defaults(func=cmd_plot)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "func"):
        parser.print_help()
        return 2
    try:
        return args.func(args)
    except BillmapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
