import datetime as dt

import numpy as np
import pytest

from billmap.oracles import SyntheticSpec, generate_corpus
from billmap.records import BillRecord, BillType, Chamber, Corpus, Party


def make_record(
    bill_id="HB-1",
    chamber=Chamber.HOUSE,
    bill_type=BillType.BILL,
    congress=100,
    intro_date=dt.date(1987, 3, 1),
    sponsor_party=Party.DEMOCRAT,
    sponsor_state="NY",
    sponsor_district=4,
    cosponsor_count=3,
    committees=frozenset({"energy and commerce"}),
    last_action_date=dt.date(1987, 6, 1),
    last_action_text="Referred to committee.",
):
    return BillRecord(
        bill_id=bill_id,
        chamber=chamber,
        bill_type=bill_type,
        congress=congress,
        intro_date=intro_date,
        sponsor_party=sponsor_party,
        sponsor_state=sponsor_state,
        sponsor_district=sponsor_district,
        cosponsor_count=cosponsor_count,
        committees=committees,
        last_action_date=last_action_date,
        last_action_text=last_action_text,
    )


@pytest.fixture
def tiny_corpus():
    records = (
        make_record(bill_id="HB-1", sponsor_state="NY", congress=100),
        make_record(
            bill_id="SB-2",
            chamber=Chamber.SENATE,
            sponsor_district=0,
            sponsor_state="CA",
            sponsor_party=Party.REPUBLICAN,
            congress=116,
            intro_date=dt.date(2020, 3, 12),
            last_action_date=dt.date(2020, 5, 1),
            committees=frozenset({"finance", "energy and commerce"}),
        ),
        make_record(
            bill_id="HB-3",
            sponsor_state="CA",
            sponsor_party=Party.OTHER,
            congress=110,
            intro_date=dt.date(2007, 1, 15),
            last_action_date=dt.date(2007, 1, 15),
            cosponsor_count=0,
            committees=frozenset(),
        ),
    )
    return Corpus(records=records, source_manifest=("test:tiny",))


@pytest.fixture(scope="session")
def blob_corpus():
    """Crisp 3-blob two-era corpus used across pipeline tests."""
    return generate_corpus(
        SyntheticSpec(
            n_pre=120, n_covid=60, n_blobs=3, separation=6.0, time_signal=6.0, seed=7
        )
    )


@pytest.fixture(scope="session")
def blob_matrix():
    """Raw well-separated Gaussian blobs plus labels."""
    from sklearn.datasets import make_blobs

    X, y = make_blobs(
        n_samples=150,
        centers=3,
        n_features=6,
        cluster_std=1.0,
        center_box=(-20.0, 20.0),
        random_state=0,
    )
    return X, y


@pytest.fixture
def rng():
    return np.random.default_rng(0)
