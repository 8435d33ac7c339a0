"""Shared fixtures: synthetic tables and discovery of the published data file."""

from __future__ import annotations

import os
from pathlib import Path

import pytest

from cardiolearn.dataset import Dataset, load_csv
from cardiolearn.synthetic import make_synthetic_dataset

REFERENCE_BASENAME = "heart_statlog_cleveland_hungary_final.csv"
REFERENCE_ENV_VAR = "CARDIOLEARN_DATA"

_SKIP_REASON = (
    f"published 1190x12 file not found; set ${REFERENCE_ENV_VAR} or place "
    f"{REFERENCE_BASENAME} under <repo>/data/ (see README)"
)


def reference_csv_path() -> Path | None:
    env = os.environ.get(REFERENCE_ENV_VAR)
    candidates = []
    if env:
        candidates.append(Path(env))
    candidates.append(Path(__file__).resolve().parents[1] / "data" / REFERENCE_BASENAME)
    for path in candidates:
        if path.is_file():
            return path
    return None


requires_reference_data = pytest.mark.skipif(
    reference_csv_path() is None, reason=_SKIP_REASON
)


@pytest.fixture(scope="session")
def reference_data() -> Dataset:
    path = reference_csv_path()
    if path is None:
        pytest.skip(_SKIP_REASON)
    return load_csv(str(path))


@pytest.fixture(scope="session")
def synth_small() -> Dataset:
    return make_synthetic_dataset(200, seed=9)


@pytest.fixture(scope="session")
def synth_medium() -> Dataset:
    return make_synthetic_dataset(400, seed=17)


@pytest.fixture(scope="session")
def synth_full_size() -> Dataset:
    return make_synthetic_dataset(1190, seed=23)
