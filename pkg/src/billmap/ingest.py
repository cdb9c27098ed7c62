"""Loading, saving, fetching, and splitting bill corpora.

Corpora live in delimited text files (comma by default) with a header row;
committees are packed into one field with an intra-field delimiter. A
fixture-backed catalog client stands in for the remote scrape so everything
is testable offline.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
import json
import os
import re
import tempfile
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    ArgumentError,
    CorpusError,
    DataError,
    FetchError,
    PageDecodeError,
    RowError,
    SchemaError,
)
from .records import (
    DEFAULT_CONGRESS_RANGE,
    BillRecord,
    Corpus,
    Era,
    normalize_committee,
    parse_bill_type,
    parse_chamber,
    parse_party,
)

BILL_FIELDS = (
    "bill_id",
    "chamber",
    "bill_type",
    "congress",
    "intro_date",
    "sponsor_party",
    "sponsor_state",
    "sponsor_district",
    "cosponsor_count",
    "committees",
    "last_action_date",
    "last_action_text",
)


@dataclass(frozen=True)
class ColumnSchema:
    """Maps BillRecord field names to input column headers."""

    columns: dict[str, str] = field(default_factory=dict)
    delimiter: str = ","
    committee_delimiter: str = ";"

    def column_for(self, field_name: str) -> str:
        return self.columns.get(field_name, field_name)


def _parse_date(raw: str) -> dt.date:
    return dt.date.fromisoformat(raw.strip())


def _record_from_row(
    row: dict[str, str], schema: ColumnSchema, row_number: int
) -> BillRecord:
    def cell(name: str) -> str:
        return row[schema.column_for(name)]

    try:
        committees_raw = cell("committees").strip()
        committees = frozenset(
            normalize_committee(c)
            for c in committees_raw.split(schema.committee_delimiter)
            if c.strip()
        )
        return BillRecord(
            bill_id=cell("bill_id").strip(),
            chamber=parse_chamber(cell("chamber")),
            bill_type=parse_bill_type(cell("bill_type")),
            congress=int(cell("congress")),
            intro_date=_parse_date(cell("intro_date")),
            sponsor_party=parse_party(cell("sponsor_party")),
            sponsor_state=cell("sponsor_state").strip().upper(),
            sponsor_district=int(cell("sponsor_district")),
            cosponsor_count=int(cell("cosponsor_count")),
            committees=committees,
            last_action_date=_parse_date(cell("last_action_date")),
            last_action_text=cell("last_action_text"),
        )
    except (ValueError, KeyError, DataError) as exc:
        raise RowError(row_number, str(exc)) from exc


def load_corpus(
    path,
    schema: ColumnSchema | None = None,
    congress_range: tuple[int, int] = DEFAULT_CONGRESS_RANGE,
    errors: str = "raise",
) -> Corpus:
    """Load a corpus from a delimited text file with a header row.

    Parameters
    ----------
    path: file path to UTF-8 delimited text.
    schema: column mapping; defaults to identity naming.
    congress_range: inclusive bounds; rows outside are rejected.
    errors: "raise" aborts on the first bad row, "skip" drops bad rows and
        records them in the corpus row_errors report.
    """
    if errors not in ("raise", "skip"):
        raise ArgumentError(f"errors must be 'raise' or 'skip', got {errors!r}")
    schema = schema or ColumnSchema()
    path = Path(path)
    lo, hi = congress_range

    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh, delimiter=schema.delimiter)
        header = reader.fieldnames or []
        missing = [
            f for f in BILL_FIELDS if schema.column_for(f) not in header
        ]
        if missing:
            raise SchemaError(
                "missing required column(s): "
                + ", ".join(schema.column_for(f) for f in missing)
            )

        records: list[BillRecord] = []
        report: list[str] = []
        for row_number, row in enumerate(reader, start=2):
            try:
                rec = _record_from_row(row, schema, row_number)
                if not lo <= rec.congress <= hi:
                    raise RowError(
                        row_number,
                        f"congress {rec.congress} outside [{lo}, {hi}]",
                    )
                records.append(rec)
            except RowError as exc:
                if errors == "raise":
                    raise
                report.append(str(exc))

    corpus = Corpus(
        records=tuple(records),
        source_manifest=(f"file:{path}",),
        row_errors=tuple(report),
    )
    return corpus


def record_to_row(rec: BillRecord, schema: ColumnSchema | None = None) -> dict:
    schema = schema or ColumnSchema()
    return {
        schema.column_for("bill_id"): rec.bill_id,
        schema.column_for("chamber"): rec.chamber.value,
        schema.column_for("bill_type"): rec.bill_type.value,
        schema.column_for("congress"): str(rec.congress),
        schema.column_for("intro_date"): rec.intro_date.isoformat(),
        schema.column_for("sponsor_party"): rec.sponsor_party.value,
        schema.column_for("sponsor_state"): rec.sponsor_state,
        schema.column_for("sponsor_district"): str(rec.sponsor_district),
        schema.column_for("cosponsor_count"): str(rec.cosponsor_count),
        schema.column_for("committees"): schema.committee_delimiter.join(
            sorted(rec.committees)
        ),
        schema.column_for("last_action_date"): rec.last_action_date.isoformat(),
        schema.column_for("last_action_text"): rec.last_action_text,
    }


def save_corpus(corpus: Corpus, path, schema: ColumnSchema | None = None) -> None:
    """Write a corpus back to delimited text plus a JSON manifest sidecar.

    Both files are written atomically (temp file + rename)."""
    schema = schema or ColumnSchema()
    path = Path(path)
    fieldnames = [schema.column_for(f) for f in BILL_FIELDS]
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=fieldnames, delimiter=schema.delimiter)
    writer.writeheader()
    for rec in corpus:
        writer.writerow(record_to_row(rec, schema))
    _atomic_write(path, buffer.getvalue())

    manifest = {
        "source": list(corpus.source_manifest),
        "rows": len(corpus),
        "era_counts": corpus.era_counts(),
    }
    manifest_path = path.with_suffix(path.suffix + ".manifest.json")
    _atomic_write(manifest_path, json.dumps(manifest, indent=2) + "\n")


def _atomic_write(path: Path, text: str) -> None:
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


# ---------------------------------------------------------------------------
# Catalog client (fixture-backed or HTTP)


@dataclass(frozen=True)
class ClientConfig:
    """Either a fixture directory of numbered JSON pages or a base URL."""

    fixture_dir: str | None = None
    base_url: str | None = None
    max_attempts: int = 3
    timeout: float = 10.0


@dataclass(frozen=True)
class CatalogQuery:
    congress_min: int = DEFAULT_CONGRESS_RANGE[0]
    congress_max: int = DEFAULT_CONGRESS_RANGE[1]
    keyword: str | None = None


_PAGE_NUM = re.compile(r"(\d+)")


def _fixture_pages(fixture_dir: Path) -> list[Path]:
    pages = [p for p in fixture_dir.iterdir() if p.suffix == ".json"]

    def page_key(p: Path):
        m = _PAGE_NUM.search(p.stem)
        return (int(m.group(1)) if m else 0, p.name)

    return sorted(pages, key=page_key)


def _record_from_obj(obj: dict, page_index: int, pos: int) -> BillRecord:
    try:
        committees_field = obj["committees"]
        if isinstance(committees_field, str):
            names = committees_field.split(";")
        else:
            names = list(committees_field)
        return BillRecord(
            bill_id=str(obj["bill_id"]),
            chamber=parse_chamber(str(obj["chamber"])),
            bill_type=parse_bill_type(str(obj["bill_type"])),
            congress=int(obj["congress"]),
            intro_date=_parse_date(str(obj["intro_date"])),
            sponsor_party=parse_party(str(obj["sponsor_party"])),
            sponsor_state=str(obj["sponsor_state"]).strip().upper(),
            sponsor_district=int(obj["sponsor_district"]),
            cosponsor_count=int(obj["cosponsor_count"]),
            committees=frozenset(
                normalize_committee(c) for c in names if str(c).strip()
            ),
            last_action_date=_parse_date(str(obj["last_action_date"])),
            last_action_text=str(obj["last_action_text"]),
        )
    except (KeyError, ValueError, DataError) as exc:
        raise PageDecodeError(page_index, f"record {pos}: {exc}") from exc


def _decode_page(raw: bytes, page_index: int) -> list[dict]:
    try:
        data = json.loads(raw.decode("utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise PageDecodeError(page_index, str(exc)) from exc
    if not isinstance(data, list):
        raise PageDecodeError(page_index, "page is not a JSON array")
    return data


def _http_get(url: str, config: ClientConfig) -> bytes:
    last: Exception | None = None
    for attempt in range(1, config.max_attempts + 1):
        try:
            with urllib.request.urlopen(url, timeout=config.timeout) as resp:
                return resp.read()
        except (urllib.error.URLError, OSError) as exc:
            last = exc
    raise FetchError(f"GET {url} failed: {last}", attempts=config.max_attempts)


def fetch_bills(config: ClientConfig, query: CatalogQuery | None = None) -> Corpus:
    """Build a corpus from paged catalog responses.

    Fixture mode reads numbered JSON page files from a directory; HTTP mode
    pages through `{base_url}?page=N` until an empty page. The keyword, when
    given, is matched case-insensitively against the last-action text (the
    only free-text field carried by a record).
    """
    query = query or CatalogQuery()
    if (config.fixture_dir is None) == (config.base_url is None):
        raise ArgumentError("configure exactly one of fixture_dir or base_url")

    pages: list[list[dict]] = []
    provenance: list[str] = []
    if config.fixture_dir is not None:
        fixture_dir = Path(config.fixture_dir)
        if not fixture_dir.is_dir():
            raise ArgumentError(f"fixture directory {fixture_dir} does not exist")
        for idx, page_path in enumerate(_fixture_pages(fixture_dir)):
            pages.append(_decode_page(page_path.read_bytes(), idx))
            provenance.append(f"fixture:{page_path}")
    else:
        idx = 0
        while True:
            url = f"{config.base_url}?page={idx}"
            body = _http_get(url, config)
            objs = _decode_page(body, idx)
            if not objs:
                break
            pages.append(objs)
            provenance.append(f"http:{url}")
            idx += 1

    keyword = query.keyword.lower() if query.keyword else None
    records: list[BillRecord] = []
    for page_index, objs in enumerate(pages):
        for pos, obj in enumerate(objs):
            rec = _record_from_obj(obj, page_index, pos)
            if not query.congress_min <= rec.congress <= query.congress_max:
                continue
            if keyword is not None and keyword not in rec.last_action_text.lower():
                continue
            records.append(rec)

    return Corpus(records=tuple(records), source_manifest=tuple(provenance))


# ---------------------------------------------------------------------------
# Splitting


def split_corpus(
    corpus: Corpus,
    mode: str,
    train_fraction: float = 0.66,
    seed: int = 0,
) -> tuple[Corpus, Corpus]:
    """Partition a corpus into (train, test).

    ByEra puts every pre-COVID record in train and every COVID record in
    test. Random draws a seeded, era-stratified split so each era's share of
    the training set matches train_fraction to within one record.
    """
    if len(corpus) == 0:
        raise ArgumentError("cannot split an empty corpus")
    if mode == "ByEra":
        train_idx = [i for i, r in enumerate(corpus) if r.era is Era.PRE_COVID]
        test_idx = [i for i, r in enumerate(corpus) if r.era is Era.COVID]
        return corpus.subset(train_idx), corpus.subset(test_idx)
    if mode != "Random":
        raise ArgumentError(f"unknown split mode {mode!r}")
    if not 0.0 < train_fraction < 1.0:
        raise ArgumentError(
            f"train_fraction must be in (0, 1), got {train_fraction}"
        )

    rng = np.random.default_rng(seed)
    train_idx: list[int] = []
    test_idx: list[int] = []
    for era in (Era.PRE_COVID, Era.COVID):
        era_idx = np.array(
            [i for i, r in enumerate(corpus) if r.era is era], dtype=np.int64
        )
        if era_idx.size == 0:
            continue
        perm = rng.permutation(era_idx.size)
        n_train = int(round(train_fraction * era_idx.size))
        shuffled = era_idx[perm]
        train_idx.extend(shuffled[:n_train].tolist())
        test_idx.extend(shuffled[n_train:].tolist())

    train_idx.sort()
    test_idx.sort()
    return corpus.subset(train_idx), corpus.subset(test_idx)
