"""Bill-level metadata records and corpora.

A :class:`BillRecord` is one bill's metadata as scraped from a legislative
catalog; a :class:`Corpus` is an ordered collection with per-record era
labels. Era assignment is a pure function of the congress number so it is
stable even when dates are missing from scraped data.
"""

from __future__ import annotations

import datetime as dt
import re
from dataclasses import dataclass, field
from enum import Enum

from .errors import CorpusError, DataError

# Congress numbers covered by the corpus; the 116th (2019-2020) opens the
# COVID era.
DEFAULT_CONGRESS_RANGE = (93, 116)
COVID_CONGRESS = 116


class Chamber(str, Enum):
    HOUSE = "House"
    SENATE = "Senate"


class BillType(str, Enum):
    BILL = "bill"
    RESOLUTION = "resolution"
    JOINT_RESOLUTION = "joint_resolution"
    CONCURRENT_RESOLUTION = "concurrent_resolution"


class Party(str, Enum):
    DEMOCRAT = "Democrat"
    REPUBLICAN = "Republican"
    OTHER = "Independent/Other"


class Era(str, Enum):
    PRE_COVID = "PreCovid"
    COVID = "Covid"


_PARTY_ALIASES = {
    "democrat": Party.DEMOCRAT,
    "democratic": Party.DEMOCRAT,
    "d": Party.DEMOCRAT,
    "republican": Party.REPUBLICAN,
    "r": Party.REPUBLICAN,
}

_BILL_TYPE_ALIASES = {
    "bill": BillType.BILL,
    "resolution": BillType.RESOLUTION,
    "joint_resolution": BillType.JOINT_RESOLUTION,
    "joint resolution": BillType.JOINT_RESOLUTION,
    "concurrent_resolution": BillType.CONCURRENT_RESOLUTION,
    "concurrent resolution": BillType.CONCURRENT_RESOLUTION,
}

_WS = re.compile(r"\s+")


def parse_party(raw: str) -> Party:
    """Map a party string to an enum; unknown strings become OTHER.

    Party is only ever a plot condition, never a model input, so an
    unrecognized label is not an error.
    """
    return _PARTY_ALIASES.get(raw.strip().lower(), Party.OTHER)


def parse_chamber(raw: str) -> Chamber:
    text = raw.strip().lower()
    if text == "house":
        return Chamber.HOUSE
    if text == "senate":
        return Chamber.SENATE
    raise ValueError(f"unknown chamber {raw!r}")


def parse_bill_type(raw: str) -> BillType:
    try:
        return _BILL_TYPE_ALIASES[raw.strip().lower()]
    except KeyError:
        raise ValueError(f"unknown bill type {raw!r}") from None


def normalize_committee(raw: str) -> str:
    """Trim, case-fold, and collapse whitespace; scraped strings vary."""
    return _WS.sub(" ", raw.strip()).casefold()


def era_of(congress: int) -> Era:
    return Era.COVID if congress >= COVID_CONGRESS else Era.PRE_COVID


@dataclass(frozen=True)
class BillRecord:
    """Metadata for one legislative bill.

    Construction validates the record-level invariants: Senate bills carry
    district 0, the last action cannot precede introduction, and the
    cosponsor count is non-negative.
    """

    bill_id: str
    chamber: Chamber
    bill_type: BillType
    congress: int
    intro_date: dt.date
    sponsor_party: Party
    sponsor_state: str
    sponsor_district: int
    cosponsor_count: int
    committees: frozenset[str]
    last_action_date: dt.date
    last_action_text: str

    def __post_init__(self):
        if self.chamber is Chamber.SENATE and self.sponsor_district != 0:
            raise DataError(
                f"bill {self.bill_id}: Senate bills must have district 0, "
                f"got {self.sponsor_district}"
            )
        if self.sponsor_district < 0:
            raise DataError(f"bill {self.bill_id}: negative district")
        if self.cosponsor_count < 0:
            raise DataError(f"bill {self.bill_id}: negative cosponsor count")
        if self.last_action_date < self.intro_date:
            raise DataError(
                f"bill {self.bill_id}: last action {self.last_action_date} "
                f"precedes introduction {self.intro_date}"
            )

    @property
    def era(self) -> Era:
        return era_of(self.congress)


@dataclass(frozen=True)
class Corpus:
    """Ordered bill records plus era labels and provenance."""

    records: tuple[BillRecord, ...]
    source_manifest: tuple[str, ...] = ()
    row_errors: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        seen: set[str] = set()
        for rec in self.records:
            if rec.bill_id in seen:
                raise CorpusError(f"duplicate bill_id {rec.bill_id!r}")
            seen.add(rec.bill_id)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def era_labels(self) -> tuple[Era, ...]:
        return tuple(r.era for r in self.records)

    def era_counts(self) -> dict[str, int]:
        counts = {Era.PRE_COVID.value: 0, Era.COVID.value: 0}
        for rec in self.records:
            counts[rec.era.value] += 1
        return counts

    def subset(self, indices) -> "Corpus":
        recs = tuple(self.records[i] for i in indices)
        return Corpus(records=recs, source_manifest=self.source_manifest)

    def by_era(self, era: Era) -> "Corpus":
        recs = tuple(r for r in self.records if r.era is era)
        return Corpus(records=recs, source_manifest=self.source_manifest)
