"""Group fairness and performance metrics, plus fair-band verdicts.

Metrics that are undefined (empty group, zero denominator) propagate as None
and serialize as "n/a" rather than NaN.
"""

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .model import LogisticModel

# Acceptance bands: difference metrics fair within +/-0.1 (closed), DI fair
# within [0.8, 1.2] (band width 0.4).
DIFF_BAND = 0.1
DI_BAND = (0.8, 1.2)

METRIC_NAMES = ("spd", "eod", "aod", "di", "accuracy", "f1", "uei")


class MetricError(ValueError):
    pass


@dataclass
class Cell:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass
class GroupConfusion:
    """Confusion counts per sensitive group (0 = unprivileged, 1 = privileged)."""

    groups: dict  # {0: Cell, 1: Cell}

    def cell(self, s: int) -> Cell:
        return self.groups[s]

    def swapped(self) -> "GroupConfusion":
        return GroupConfusion(groups={0: self.groups[1], 1: self.groups[0]})

    def pooled(self) -> Cell:
        a, b = self.groups[0], self.groups[1]
        return Cell(tp=a.tp + b.tp, fp=a.fp + b.fp, tn=a.tn + b.tn, fn=a.fn + b.fn)


def group_confusion(m: LogisticModel, d: Dataset, attribute: str,
                    threshold: float = 0.5) -> GroupConfusion:
    if attribute not in d.sensitive:
        raise MetricError(f"unknown sensitive attribute {attribute!r}")
    pred = (m.predict_proba(d.features) >= threshold).astype(int)
    s = d.sensitive[attribute]
    groups = {}
    for g in (0, 1):
        mask = s == g
        y, yh = d.labels[mask], pred[mask]
        groups[g] = Cell(
            tp=int(np.sum((y == 1) & (yh == 1))),
            fp=int(np.sum((y == 0) & (yh == 1))),
            tn=int(np.sum((y == 0) & (yh == 0))),
            fn=int(np.sum((y == 1) & (yh == 0))),
        )
    return GroupConfusion(groups=groups)


def _success_rate(c: Cell):
    return (c.tp + c.fp) / c.total if c.total else None


def _tpr(c: Cell):
    pos = c.tp + c.fn
    return c.tp / pos if pos else None


def _fpr(c: Cell):
    neg = c.fp + c.tn
    return c.fp / neg if neg else None


def statistical_parity_difference(g: GroupConfusion):
    """P(pred=1 | unprivileged) - P(pred=1 | privileged); ideal 0."""
    r0, r1 = _success_rate(g.cell(0)), _success_rate(g.cell(1))
    if r0 is None or r1 is None:
        return None
    return r0 - r1


def disparate_impact(g: GroupConfusion):
    """P(pred=1 | unprivileged) / P(pred=1 | privileged); ideal 1."""
    r0, r1 = _success_rate(g.cell(0)), _success_rate(g.cell(1))
    if r0 is None or r1 is None or r1 == 0:
        return None
    return r0 / r1


def equal_opportunity_difference(g: GroupConfusion):
    t0, t1 = _tpr(g.cell(0)), _tpr(g.cell(1))
    if t0 is None or t1 is None:
        return None
    return t0 - t1


def average_odds_difference(g: GroupConfusion):
    t0, t1 = _tpr(g.cell(0)), _tpr(g.cell(1))
    f0, f1 = _fpr(g.cell(0)), _fpr(g.cell(1))
    if None in (t0, t1, f0, f1):
        return None
    return 0.5 * ((f0 - f1) + (t0 - t1))


def accuracy(g: GroupConfusion):
    c = g.pooled()
    return (c.tp + c.tn) / c.total if c.total else None


def f1_score(g: GroupConfusion):
    """F1 of the favorable class over pooled groups."""
    c = g.pooled()
    denom = 2 * c.tp + c.fp + c.fn
    if c.total == 0:
        return None
    return 2 * c.tp / denom if denom else 0.0


def underestimation_index(m: LogisticModel, d: Dataset, attribute: str) -> float:
    """Hellinger distance between the empirical joint (s, y) distribution and
    the model-induced one; 0 means the model tracks the data exactly."""
    if attribute not in d.sensitive:
        raise MetricError(f"unknown sensitive attribute {attribute!r}")
    s = d.sensitive[attribute]
    n = d.n_samples
    p1 = m.predict_proba(d.features)
    bc = 0.0  # Bhattacharyya coefficient
    for g in (0, 1):
        mask = s == g
        for y in (0, 1):
            p_cell = np.sum(mask & (d.labels == y)) / n
            q_cell = np.sum(p1[mask] if y == 1 else 1.0 - p1[mask]) / n
            bc += np.sqrt(p_cell * q_cell)
    return float(np.sqrt(max(0.0, 1.0 - min(bc, 1.0))))


def fair_band(values: dict) -> dict:
    """Verdict per metric: fair / unfair / undefined."""
    verdicts = {}
    for name in ("spd", "eod", "aod"):
        if name in values:
            v = values[name]
            verdicts[name] = (
                "undefined" if v is None else "fair" if abs(v) <= DIFF_BAND else "unfair"
            )
    if "di" in values:
        v = values["di"]
        verdicts["di"] = (
            "undefined" if v is None else "fair" if DI_BAND[0] <= v <= DI_BAND[1] else "unfair"
        )
    return verdicts


@dataclass
class FairnessReport:
    spd: float
    eod: float
    aod: float
    di: float
    accuracy: float
    f1: float
    uei: float
    verdicts: dict

    def to_dict(self) -> dict:
        def render(v):
            return "n/a" if v is None else v
        return {
            "spd": render(self.spd),
            "eod": render(self.eod),
            "aod": render(self.aod),
            "di": render(self.di),
            "accuracy": render(self.accuracy),
            "f1": render(self.f1),
            "uei": render(self.uei),
            "verdicts": dict(self.verdicts),
        }


def fairness_report(m: LogisticModel, d: Dataset, attribute: str,
                    threshold: float = 0.5) -> FairnessReport:
    g = group_confusion(m, d, attribute, threshold)
    values = {
        "spd": statistical_parity_difference(g),
        "eod": equal_opportunity_difference(g),
        "aod": average_odds_difference(g),
        "di": disparate_impact(g),
    }
    return FairnessReport(
        spd=values["spd"],
        eod=values["eod"],
        aod=values["aod"],
        di=values["di"],
        accuracy=accuracy(g),
        f1=f1_score(g),
        uei=underestimation_index(m, d, attribute),
        verdicts=fair_band(values),
    )
