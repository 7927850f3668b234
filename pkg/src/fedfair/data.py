"""Dataset loading, preprocessing recipes for Adult/Compas, and stratified splitting.

Both loaders produce a fully binary-encoded feature matrix: binned numeric
columns are one-hot encoded and the binary sensitive attributes are kept as
model features as well (in-processing mitigation needs the model to see them).
"""

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from .util import largest_remainder


class DataError(ValueError):
    """Raised for missing files, malformed headers, or unknown category values."""


ADULT_COLUMNS = [
    "age", "workclass", "fnlwgt", "education", "education-num",
    "marital-status", "occupation", "relationship", "race", "sex",
    "capital-gain", "capital-loss", "hours-per-week", "native-country",
    "income",
]

ADULT_RACES = {"White", "Black", "Asian-Pac-Islander", "Amer-Indian-Eskimo", "Other"}

COMPAS_REQUIRED = [
    "sex", "age", "race", "priors_count", "c_charge_degree",
    "days_b_screening_arrest", "c_jail_in", "c_jail_out", "two_year_recid",
]


@dataclass
class Dataset:
    """Binary-encoded samples: features, labels, named sensitive flags, weights.

    Sensitive values use 1 for the privileged group; label 1 is the favorable
    outcome. Weights default to all ones and act as multiplicative factors on
    the training loss.
    """

    features: np.ndarray
    labels: np.ndarray
    sensitive: dict
    weights: np.ndarray = None
    feature_names: list = field(default_factory=list)

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float)
        self.labels = np.asarray(self.labels, dtype=int)
        n = len(self.labels)
        if self.weights is None:
            self.weights = np.ones(n)
        self.weights = np.asarray(self.weights, dtype=float)
        if not self.feature_names:
            self.feature_names = [f"x{j}" for j in range(self.features.shape[1])]
        self.sensitive = {k: np.asarray(v, dtype=int) for k, v in self.sensitive.items()}
        if self.features.shape[0] != n:
            raise DataError("features and labels disagree on sample count")
        if len(self.feature_names) != self.features.shape[1]:
            raise DataError("feature_names length does not match feature matrix")
        if self.weights.shape[0] != n:
            raise DataError("weights length does not match sample count")
        if np.any(self.weights <= 0):
            raise DataError("weights must be positive")
        if not np.isin(self.labels, (0, 1)).all():
            raise DataError("labels must be 0/1")
        for name, vals in self.sensitive.items():
            if vals.shape[0] != n:
                raise DataError(f"sensitive attribute {name!r} has wrong length")
            if not np.isin(vals, (0, 1)).all():
                raise DataError(f"sensitive attribute {name!r} must be 0/1")

    @property
    def n_samples(self) -> int:
        return len(self.labels)

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx)
        return Dataset(
            features=self.features[idx],
            labels=self.labels[idx],
            sensitive={k: v[idx] for k, v in self.sensitive.items()},
            weights=self.weights[idx],
            feature_names=list(self.feature_names),
        )

    def with_weights(self, weights) -> "Dataset":
        return Dataset(
            features=self.features,
            labels=self.labels,
            sensitive=dict(self.sensitive),
            weights=np.asarray(weights, dtype=float),
            feature_names=list(self.feature_names),
        )


def _bin_decade(value: int) -> str:
    lo = (int(value) // 10) * 10
    return f"{lo}-{lo + 10}"


def _one_hot(series: pd.Series, prefix: str):
    """One-hot columns for the sorted distinct values of a string series."""
    values = sorted(series.unique())
    names = [f"{prefix}={v}" for v in values]
    mat = np.stack([(series == v).to_numpy(dtype=float) for v in values], axis=1)
    return mat, names


def _check_path(path) -> Path:
    p = Path(path)
    if not p.exists():
        raise DataError(f"file not found: {p}")
    return p


def load_adult(path) -> Dataset:
    """Load the UCI Adult CSV (train+test concatenated accepted) and preprocess.

    Keeps sex, race, age, education and class; age and education-num are
    binned by decade and one-hot encoded. sex (Male=1) and race (White=1) are
    exposed as sensitive attributes and kept as features. Label 1 iff >50K.
    """
    p = _check_path(path)
    with open(p) as fh:
        first = fh.readline()
    has_header = "age" in first.split(",")[0].strip().lower()
    df = pd.read_csv(
        p,
        header=0 if has_header else None,
        names=None if has_header else ADULT_COLUMNS,
        skipinitialspace=True,
        comment="|",
        skip_blank_lines=True,
    )
    missing = [c for c in ("age", "education-num", "sex", "race", "income") if c not in df.columns]
    if missing:
        raise DataError(f"malformed header, missing columns: {missing}")

    df = df[["age", "education-num", "sex", "race", "income"]].copy()
    df = df.replace("?", np.nan).dropna()

    income = df["income"].astype(str).str.strip().str.rstrip(".")
    bad = ~income.isin(["<=50K", ">50K"])
    if bad.any():
        raise DataError(f"unknown income value at row {df.index[bad][0]}: {income[bad].iloc[0]!r}")
    sex = df["sex"].astype(str).str.strip()
    bad = ~sex.isin(["Male", "Female"])
    if bad.any():
        raise DataError(f"unknown sex value at row {df.index[bad][0]}: {sex[bad].iloc[0]!r}")
    race = df["race"].astype(str).str.strip()
    bad = ~race.isin(ADULT_RACES)
    if bad.any():
        raise DataError(f"unknown race value at row {df.index[bad][0]}: {race[bad].iloc[0]!r}")

    age_bins = df["age"].astype(int).map(_bin_decade)
    edu_bins = df["education-num"].astype(int).map(_bin_decade)
    sex01 = (sex == "Male").to_numpy(dtype=float)
    race01 = (race == "White").to_numpy(dtype=float)

    age_mat, age_names = _one_hot(age_bins, "age")
    edu_mat, edu_names = _one_hot(edu_bins, "education")
    features = np.concatenate([age_mat, edu_mat, sex01[:, None], race01[:, None]], axis=1)
    names = age_names + edu_names + ["sex", "race"]
    labels = (income == ">50K").to_numpy(dtype=int)

    return Dataset(
        features=features,
        labels=labels,
        sensitive={"sex": sex01.astype(int), "race": race01.astype(int)},
        feature_names=names,
    )


def _bin_compas_age(age: int) -> str:
    if age < 25:
        return "Under 25"
    if age <= 45:
        return "25-45"
    return "Over 45"


def _bin_priors(count: int) -> str:
    if count == 0:
        return "0"
    if count <= 3:
        return "1-3"
    return ">3"


def load_compas(path) -> Dataset:
    """Load the ProPublica Compas CSV and preprocess.

    Filters samples whose charge date is more than 30 days from arrest and
    samples without jail time. Keeps sex, race, age, prior count and charge
    degree; sex (Female=1) and race (White=1) are sensitive attributes.
    Label 1 = will not reoffend.
    """
    p = _check_path(path)
    df = pd.read_csv(p, skipinitialspace=True)
    missing = [c for c in COMPAS_REQUIRED if c not in df.columns]
    if missing:
        raise DataError(f"malformed header, missing columns: {missing}")

    df = df[COMPAS_REQUIRED].copy()
    df["c_jail_in"] = df["c_jail_in"].replace("", np.nan)
    df["c_jail_out"] = df["c_jail_out"].replace("", np.nan)
    df = df.dropna()
    df = df[df["days_b_screening_arrest"].abs() <= 30]

    sex = df["sex"].astype(str).str.strip()
    bad = ~sex.isin(["Male", "Female"])
    if bad.any():
        raise DataError(f"unknown sex value at row {df.index[bad][0]}: {sex[bad].iloc[0]!r}")
    degree = df["c_charge_degree"].astype(str).str.strip()
    bad = ~degree.isin(["F", "M"])
    if bad.any():
        raise DataError(
            f"unknown charge degree at row {df.index[bad][0]}: {degree[bad].iloc[0]!r}"
        )

    age_bins = df["age"].astype(int).map(_bin_compas_age)
    prior_bins = df["priors_count"].astype(int).map(_bin_priors)
    sex01 = (sex == "Female").to_numpy(dtype=float)  # Compas: female is privileged
    race01 = (df["race"].astype(str).str.strip() == "Caucasian").to_numpy(dtype=float)
    degree01 = (degree == "F").to_numpy(dtype=float)

    age_mat, age_names = _one_hot(age_bins, "age")
    prior_mat, prior_names = _one_hot(prior_bins, "priors")
    features = np.concatenate(
        [age_mat, prior_mat, degree01[:, None], sex01[:, None], race01[:, None]], axis=1
    )
    names = age_names + prior_names + ["charge_degree=F", "sex", "race"]
    labels = (df["two_year_recid"].astype(int) == 0).to_numpy(dtype=int)

    return Dataset(
        features=features,
        labels=labels,
        sensitive={"sex": sex01.astype(int), "race": race01.astype(int)},
        feature_names=names,
    )


def _joint_cells(d: Dataset):
    """Group sample indices by the joint (all sensitive attributes, label) cell."""
    keys = list(d.sensitive)
    cols = [d.sensitive[k] for k in keys] + [d.labels]
    cells = {}
    for i in range(d.n_samples):
        cell = tuple(int(c[i]) for c in cols)
        cells.setdefault(cell, []).append(i)
    return {cell: np.array(idx) for cell, idx in cells.items()}


def stratified_split(d: Dataset, test_fraction: float, seed: int):
    """Split into (train, test) preserving the joint (sensitive, label) cells.

    Per-cell test counts come from largest-remainder apportionment of
    round(test_fraction * n), so the total is exact and each cell is within
    one sample of its quota.
    """
    if d.n_samples == 0:
        raise DataError("cannot split an empty dataset")
    if not 0 < test_fraction < 1:
        raise DataError("test_fraction must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    cells = _joint_cells(d)
    order = sorted(cells)
    sizes = [len(cells[c]) for c in order]
    total_test = int(round(test_fraction * d.n_samples))
    alloc = largest_remainder(total_test, sizes)
    test_idx, train_idx = [], []
    for cell, take in zip(order, alloc):
        members = cells[cell]
        if take > len(members):
            raise DataError(
                f"cell {cell} has {len(members)} samples, stratification requires {take}"
            )
        perm = rng.permutation(members)
        test_idx.extend(perm[:take])
        train_idx.extend(perm[take:])
    return d.subset(np.sort(train_idx)), d.subset(np.sort(test_idx))


def save_dataset(d: Dataset, path) -> None:
    """Write the canonical CSV: columns w, y, s_<attr>..., f_<feature>...."""
    cols = {"w": d.weights, "y": d.labels}
    for name in d.sensitive:
        cols[f"s_{name}"] = d.sensitive[name]
    for j, name in enumerate(d.feature_names):
        cols[f"f_{name}"] = d.features[:, j].astype(int)
    pd.DataFrame(cols).to_csv(path, index=False)


def load_dataset(path) -> Dataset:
    """Read a canonical CSV written by save_dataset."""
    p = _check_path(path)
    df = pd.read_csv(p)
    if "w" not in df.columns or "y" not in df.columns:
        raise DataError("malformed canonical file: missing w/y columns")
    sensitive = {
        c[2:]: df[c].to_numpy(dtype=int) for c in df.columns if c.startswith("s_")
    }
    feat_cols = [c for c in df.columns if c.startswith("f_")]
    return Dataset(
        features=df[feat_cols].to_numpy(dtype=float),
        labels=df["y"].to_numpy(dtype=int),
        sensitive=sensitive,
        weights=df["w"].to_numpy(dtype=float),
        feature_names=[c[2:] for c in feat_cols],
    )
