"""CSV/JSON artifact readers and writers shared by the CLI and experiments.

Floats are written with repr (shortest round-trip form), so artifacts are
byte-deterministic and reload exactly.
"""

from __future__ import annotations

import csv
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import DataError
from .projector import ProjectionResult


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def _coord_headers(dim: int) -> list[str]:
    names = ["x", "y", "z"]
    if dim <= 3:
        return names[:dim]
    return names + [f"c{t}" for t in range(3, dim)]


def write_embedding_csv(path, coords, row_ids, parties, eras, split: str = "train") -> None:
    coords = np.asarray(coords, dtype=np.float64)
    headers = ["bill_id", *_coord_headers(coords.shape[1]), "party", "era", "split"]
    lines = [",".join(headers)]
    writer_rows = []
    for i, rid in enumerate(row_ids):
        row = [rid]
        row.extend(repr(float(v)) for v in coords[i])
        row.extend([parties[i].value, eras[i].value, split])
        writer_rows.append(row)
    for row in writer_rows:
        lines.append(",".join(_csv_escape(cell) for cell in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_projection_csv(path, projection: ProjectionResult) -> None:
    coords = projection.coords
    headers = [
        "bill_id",
        *_coord_headers(coords.shape[1]),
        "party",
        "era",
        "split",
        "nearest_train_dist",
    ]
    lines = [",".join(headers)]
    for i, rid in enumerate(projection.row_ids):
        row = [rid]
        row.extend(repr(float(v)) for v in coords[i])
        row.extend(
            [
                projection.party_labels[i].value,
                projection.era_labels[i].value,
                "projected",
                repr(float(projection.nearest_train_dist[i])),
            ]
        )
        lines.append(",".join(_csv_escape(cell) for cell in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def _csv_escape(cell: str) -> str:
    if any(ch in cell for ch in ",\"\n"):
        return '"' + cell.replace('"', '""') + '"'
    return cell


def read_points_csv(path) -> dict:
    """Read an embedding/projection CSV into column arrays.

    Returns a dict with 'coords' (n x d), plus any of 'bill_id', 'party',
    'era', 'split', 'label', 'nearest_train_dist' present in the header.
    """
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        headers = reader.fieldnames or []
        coord_cols = [h for h in headers if h in ("x", "y", "z") or h.startswith("c")]
        if "x" not in headers or "y" not in headers:
            raise DataError(f"{path}: expected coordinate columns x, y")
        rows = list(reader)

    coords = np.array(
        [[float(r[c]) for c in coord_cols] for r in rows], dtype=np.float64
    )
    out: dict = {"coords": coords}
    for col in ("bill_id", "party", "era", "split", "label"):
        if col in headers:
            out[col] = [r[col] for r in rows]
    if "nearest_train_dist" in headers:
        out["nearest_train_dist"] = np.array(
            [float(r["nearest_train_dist"]) for r in rows], dtype=np.float64
        )
    return out


def read_matrix_csv(path) -> np.ndarray:
    """Read a plain numeric CSV (header row; non-numeric id columns skipped)."""
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        headers = next(reader)
        rows = list(reader)
    if not rows:
        raise DataError(f"{path}: no data rows")

    numeric_cols = []
    for j in range(len(headers)):
        try:
            float(rows[0][j])
            numeric_cols.append(j)
        except (ValueError, IndexError):
            continue
    if not numeric_cols:
        raise DataError(f"{path}: no numeric columns")
    try:
        return np.array(
            [[float(row[j]) for j in numeric_cols] for row in rows],
            dtype=np.float64,
        )
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from exc


def write_json(path, payload: dict) -> None:
    atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def read_json(path) -> dict:
    path = Path(path)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"corrupt JSON in {path}: {exc.msg} at byte {exc.pos}") from exc
