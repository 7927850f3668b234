"""Shared fixtures: synthetic raw files, loaded datasets, and a hand-checkable
10-sample dataset whose reweighing arithmetic is easy to verify by hand."""

import numpy as np
import pytest

from fedfair.data import Dataset, load_adult, load_compas, stratified_split
from fedfair.synth import make_adult_csv, make_compas_csv

ACCEPT_LINES = []


def record_criterion(n: int, passed: bool, detail: str) -> None:
    ACCEPT_LINES.append(f"criterion {n:>2}: {'PASS' if passed else 'FAIL'} - {detail}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPT_LINES:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in sorted(ACCEPT_LINES):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def adult_raw(tmp_path_factory):
    path = tmp_path_factory.mktemp("raw") / "adult.csv"
    make_adult_csv(path)
    return path


@pytest.fixture(scope="session")
def compas_raw(tmp_path_factory):
    path = tmp_path_factory.mktemp("raw") / "compas.csv"
    make_compas_csv(path)
    return path


@pytest.fixture(scope="session")
def adult(adult_raw):
    return load_adult(adult_raw)


@pytest.fixture(scope="session")
def compas(compas_raw):
    return load_compas(compas_raw)


@pytest.fixture(scope="session")
def adult_split(adult):
    return stratified_split(adult, 0.2, 0)


def make_fixture10() -> Dataset:
    """Cells (s,y): (1,1):4, (1,0):2, (0,1):1, (0,0):3.

    Marginals: s=1 6, s=0 4, y=1 5, y=0 5, total 10, so the reweighing
    weights are W(1,1)=0.75, W(1,0)=1.5, W(0,1)=2.0, W(0,0)=2/3.
    """
    s = np.array([1, 1, 1, 1, 1, 1, 0, 0, 0, 0])
    y = np.array([1, 1, 1, 1, 0, 0, 1, 0, 0, 0])
    rng = np.random.default_rng(7)
    features = np.column_stack([rng.integers(0, 2, 10).astype(float), s.astype(float)])
    return Dataset(
        features=features,
        labels=y,
        sensitive={"sex": s},
        feature_names=["x0", "sex"],
    )


@pytest.fixture
def fixture10():
    return make_fixture10()


def make_balanced(n: int = 100) -> Dataset:
    """n/4 samples in every (s, y) cell: s and y statistically independent."""
    assert n % 4 == 0
    s = np.repeat([1, 1, 0, 0], n // 4)
    y = np.concatenate([np.ones(n // 4), np.zeros(n // 4), np.ones(n // 4), np.zeros(n // 4)]).astype(int)
    rng = np.random.default_rng(11)
    features = np.column_stack([rng.standard_normal(n), s.astype(float)])
    return Dataset(features=features, labels=y, sensitive={"sex": s}, feature_names=["x0", "sex"])


@pytest.fixture
def balanced100():
    return make_balanced(100)
