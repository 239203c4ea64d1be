"""Shared fixtures: the six-plan catalog, the reference traffic profile, and
small CDR builders."""

from __future__ import annotations

from pathlib import Path

import pytest

from tariffopt import Exponential, TrafficCell, TrafficProfile, load_catalog

DATA_DIR = Path(__file__).resolve().parents[1] / "data"

CATALOG_PATH = DATA_DIR / "mts_catalog.json"
CDR_PATH = DATA_DIR / "sample_cdr.csv"
PREFIXES_PATH = DATA_DIR / "prefixes.csv"

#: monthly call rates per (destination, day) class; margins: 23 same-network,
#: 7 other-mobile, 9 landline, and 33 workday / 6 weekend calls
REFERENCE_CELL_RATES = {
    ("same-network", "workday"): 19.0,
    ("same-network", "weekend"): 4.0,
    ("other-mobile", "workday"): 6.0,
    ("other-mobile", "weekend"): 1.0,
    ("landline", "workday"): 8.0,
    ("landline", "weekend"): 1.0,
}

REFERENCE_MU = 0.41


def make_reference_profile(mu: float = REFERENCE_MU, months: float = 6.0) -> TrafficProfile:
    model = Exponential(mu=mu)
    cells = tuple(
        TrafficCell(destination_class=dest, day_class=day, rate=rate, durations=model)
        for (dest, day), rate in REFERENCE_CELL_RATES.items()
    )
    return TrafficProfile(cells=cells, observation_months=months)


@pytest.fixture(scope="session")
def mts_catalog():
    with CATALOG_PATH.open("rb") as fh:
        return load_catalog(fh)


@pytest.fixture(scope="session")
def reference_profile():
    return make_reference_profile()
