"""Reweighing weights from (sensitive, label) counts, locally or from DP-noised counts.

The weight for a cell is the ratio of the expected to the observed joint
probability of (s, y); attaching it to every sample in the cell makes the
sensitive attribute and the label statistically independent under the
weighted distribution.
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset

CELLS = [(1, 1), (1, 0), (0, 1), (0, 0)]

# Negative noisy counts are floored at half an individual before weight
# computation so weights stay positive and finite; clamping is post-processing
# and therefore privacy-safe.
NOISY_COUNT_FLOOR = 0.5


class ReweighError(ValueError):
    pass


@dataclass
class CountTable:
    """Counts per (sensitive value, label) cell; noisy counts are real-valued."""

    attribute: str
    counts: dict = field(default_factory=lambda: {c: 0.0 for c in CELLS})

    def __post_init__(self):
        if set(self.counts) != set(CELLS):
            raise ReweighError("count table must have exactly the four (s, y) cells")

    def total(self) -> float:
        return sum(self.counts.values())

    def group_total(self, s: int) -> float:
        return self.counts[s, 0] + self.counts[s, 1]

    def label_total(self, y: int) -> float:
        return self.counts[0, y] + self.counts[1, y]


@dataclass
class WeightTable:
    attribute: str
    weights: dict

    def __post_init__(self):
        for cell, w in self.weights.items():
            if not np.isfinite(w) or w <= 0:
                raise ReweighError(f"weight for cell {cell} is not a positive real: {w}")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["s", "y", "w"])
            for s, y in CELLS:
                writer.writerow([s, y, repr(self.weights[s, y])])

    @classmethod
    def from_csv(cls, path, attribute: str = "") -> "WeightTable":
        weights = {}
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                weights[int(row["s"]), int(row["y"])] = float(row["w"])
        return cls(attribute=attribute, weights=weights)


def count_pairs(d: Dataset, attribute: str) -> CountTable:
    """Exact per-cell counts of (sensitive value, label)."""
    if attribute not in d.sensitive:
        raise ReweighError(f"unknown sensitive attribute {attribute!r}")
    s = d.sensitive[attribute]
    counts = {
        (sv, yv): float(np.sum((s == sv) & (d.labels == yv))) for sv, yv in CELLS
    }
    return CountTable(attribute=attribute, counts=counts)


def weights_from_counts(c: CountTable) -> WeightTable:
    """W(s,y) = (group marginal * label marginal) / (cell count * total).

    Any cell whose own count or marginals vanish gets W = 1, which covers
    single-group parties (their weights are all 1).
    """
    total = c.total()
    weights = {}
    for s, y in CELLS:
        cell = c.counts[s, y]
        num = c.group_total(s) * c.label_total(y)
        den = cell * total
        weights[s, y] = num / den if num > 0 and den > 0 else 1.0
    return WeightTable(attribute=c.attribute, weights=weights)


def noisy_counts(c: CountTable, epsilon: float, seed) -> CountTable:
    """Add Laplace noise of scale 1/epsilon per cell (counting-query sensitivity 1)."""
    if epsilon <= 0:
        raise ReweighError("epsilon must be positive")
    rng = np.random.default_rng(seed)
    noise = rng.laplace(scale=1.0 / epsilon, size=len(CELLS))
    noisy = {
        cell: max(c.counts[cell] + noise[k], NOISY_COUNT_FLOOR)
        for k, cell in enumerate(CELLS)
    }
    return CountTable(attribute=c.attribute, counts=noisy)


def merge_counts(tables) -> CountTable:
    """Cell-wise sum of count tables sharing one attribute."""
    tables = list(tables)
    if not tables:
        raise ReweighError("nothing to merge")
    attr = tables[0].attribute
    if any(t.attribute != attr for t in tables):
        raise ReweighError("cannot merge count tables for different attributes")
    counts = {cell: sum(t.counts[cell] for t in tables) for cell in CELLS}
    return CountTable(attribute=attr, counts=counts)


def apply_weight_table(d: Dataset, w: WeightTable) -> Dataset:
    """Set each sample's weight to W(s_i, y_i)."""
    if w.attribute not in d.sensitive:
        raise ReweighError(f"unknown sensitive attribute {w.attribute!r}")
    s = d.sensitive[w.attribute]
    lut = np.empty((2, 2))
    for (sv, yv), val in w.weights.items():
        lut[sv, yv] = val
    return d.with_weights(lut[s, d.labels])


def local_reweigh(d: Dataset, attribute: str) -> Dataset:
    """Reweigh a dataset from its own exact counts; features and labels untouched."""
    return apply_weight_table(d, weights_from_counts(count_pairs(d, attribute)))
