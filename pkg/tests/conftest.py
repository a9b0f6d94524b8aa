import os
import time
from pathlib import Path

import pytest
from hypothesis import settings

from fairfrontier.classifier import TrainConfig
from fairfrontier.dataset import build_balanced, filter_records, parse_raw
from fairfrontier.frontier import GridConfig, build_family
from synthdata import synthetic_compas_csv

settings.register_profile("suite", deadline=None, derandomize=True, max_examples=60)
settings.load_profile("suite")

THRESHOLDS_21 = [i / 20 for i in range(21)]

#: Where the public two-year table is looked for; tests that reproduce
#: published numbers skip when it is absent.
REAL_CSV_ENV = "COMPAS_CSV"
REAL_CSV_CANDIDATES = (
    Path("data/compas-scores-two-years.csv"),
    Path("compas-scores-two-years.csv"),
)


def real_csv_path() -> Path | None:
    env = os.environ.get(REAL_CSV_ENV)
    if env:
        path = Path(env)
        if path.is_file():
            return path
    for candidate in REAL_CSV_CANDIDATES:
        if candidate.is_file():
            return candidate
    return None


@pytest.fixture(scope="session")
def synthetic_csv() -> bytes:
    return synthetic_compas_csv()


@pytest.fixture(scope="session")
def eligible_records(synthetic_csv):
    return filter_records(parse_raw(synthetic_csv).records).records


@pytest.fixture(scope="session")
def race_dataset(eligible_records):
    return build_balanced(eligible_records, "race", 1500, seed=0)


@pytest.fixture(scope="session")
def small_race_dataset(eligible_records):
    return build_balanced(eligible_records, "race", 300, seed=7)


@pytest.fixture(scope="session")
def small_artifact(small_race_dataset):
    return build_family(
        small_race_dataset,
        THRESHOLDS_21,
        GridConfig(levels=5, span=4.0),
        TrainConfig(max_iterations=600),
        workers=2,
    )


@pytest.fixture(scope="session")
def full_race_build(race_dataset):
    """Default-parameter race artifact plus its build wall time in seconds."""
    start = time.monotonic()
    artifact = build_family(
        race_dataset,
        THRESHOLDS_21,
        GridConfig(),
        TrainConfig(),
        workers=4,
    )
    return artifact, time.monotonic() - start
