"""Seeded synthetic raw files in the UCI Adult / ProPublica Compas layouts.

For demos and tests in environments without the original files. The
generators plant direct group/label bias (income and recidivism depend on the
sensitive attributes) so mitigation effects are observable end to end.
"""

import numpy as np
import pandas as pd

from .data import ADULT_COLUMNS


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


def make_adult_csv(path, n: int = 48842, seed: int = 0) -> None:
    """Adult-format CSV (15 columns, header row) with biased income odds."""
    rng = np.random.default_rng(seed)
    male = rng.random(n) < 0.52
    white = rng.random(n) < 0.85
    race = np.where(white, "White", np.where(rng.random(n) < 0.7, "Black", "Other"))
    age = np.clip(np.rint(rng.normal(38, 13, n)), 17, 90).astype(int)
    edu = np.clip(np.rint(rng.normal(6.6, 2.6, n)), 1, 16).astype(int)
    low_edu = edu < 10
    # Interaction terms concentrate unprivileged positives in the low-education
    # band so that reweighing corrects rates without skewing TPR/FPR parity.
    z = (
        0.65 * (edu - 10)
        + 0.025 * (age - 38)
        + 1.35 * male
        + 0.50 * white
        - 1.23
        + 0.60 * (~male & low_edu)
        + 0.15 * ((race != "White") & low_edu)
    )
    income = np.where(rng.random(n) < _sigmoid(z), ">50K", "<=50K")
    df = pd.DataFrame(
        {
            "age": age,
            "workclass": "Private",
            "fnlwgt": rng.integers(20000, 400000, n),
            "education": "Some-college",
            "education-num": edu,
            "marital-status": "Never-married",
            "occupation": "Sales",
            "relationship": "Not-in-family",
            "race": race,
            "sex": np.where(male, "Male", "Female"),
            "capital-gain": 0,
            "capital-loss": 0,
            "hours-per-week": 40,
            "native-country": "United-States",
            "income": income,
        },
        columns=ADULT_COLUMNS,
    )
    df.to_csv(path, index=False)


def make_compas_csv(path, n: int = 9000, seed: int = 0) -> None:
    """Compas-format CSV with the screening-date and jail-time quirks included."""
    rng = np.random.default_rng(seed)
    female = rng.random(n) < 0.19
    caucasian = rng.random(n) < 0.34
    race = np.where(
        caucasian, "Caucasian", np.where(rng.random(n) < 0.75, "African-American", "Hispanic")
    )
    age = np.clip(np.rint(rng.gamma(6.0, 5.6, n) + 18), 18, 80).astype(int)
    priors = np.minimum(rng.poisson(np.where(caucasian, 1.6, 3.0)), 25)
    z = (
        0.22 * priors
        - 0.035 * (age - 25)
        - 0.55 * female
        - 0.35 * caucasian
        + 0.15
    )
    recid = (rng.random(n) < _sigmoid(z)).astype(int)
    days = np.rint(rng.normal(0, 12, n)).astype(int)
    # ~6% screened far from the charge date, ~5% without jail time; both are
    # filtered out by the loader.
    far = rng.random(n) < 0.06
    days = np.where(far, days + np.sign(rng.standard_normal(n)) * 60, days).astype(int)
    jailed = rng.random(n) >= 0.05
    df = pd.DataFrame(
        {
            "id": np.arange(1, n + 1),
            "sex": np.where(female, "Female", "Male"),
            "age": age,
            "race": race,
            "priors_count": priors,
            "c_charge_degree": np.where(rng.random(n) < 0.65, "F", "M"),
            "days_b_screening_arrest": days,
            "c_jail_in": np.where(jailed, "2013-01-01 06:00:00", ""),
            "c_jail_out": np.where(jailed, "2013-01-03 06:00:00", ""),
            "two_year_recid": recid,
        }
    )
    df.to_csv(path, index=False)
