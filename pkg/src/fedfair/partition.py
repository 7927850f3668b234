"""Partition a training dataset among simulated parties.

Three schemes: stratified IID shards of equal size, mirrored two-party group
ratios, and arbitrary per-party (ratio, size) tables. All group/label counts
use largest-remainder apportionment and all draws are without replacement.
"""

from dataclasses import dataclass, field

import numpy as np

from .data import Dataset, _joint_cells
from .util import largest_remainder


class PartitionError(ValueError):
    pass


@dataclass
class PartitionSpec:
    scheme: str  # stratified_iid | two_party_ratio | table_driven
    n_parties: int = 1
    attribute: str = None
    ratios: list = None  # per party (unprivileged%, privileged%)
    sizes: list = None
    per_party: int = None
    seed: int = 0

    def __post_init__(self):
        if self.scheme not in ("stratified_iid", "two_party_ratio", "table_driven"):
            raise PartitionError(f"unknown partition scheme {self.scheme!r}")
        if self.scheme != "stratified_iid" and not self.attribute:
            raise PartitionError(f"scheme {self.scheme!r} requires an attribute")
        if self.ratios:
            for r in self.ratios:
                if abs(sum(r) - 100) > 1e-9:
                    raise PartitionError(f"ratio {r} does not sum to 100")


@dataclass
class Partition:
    parties: list
    provenance: list = field(default_factory=list)  # per-party origin indices


def make_partition(d: Dataset, spec: PartitionSpec) -> Partition:
    if spec.scheme == "stratified_iid":
        return split_stratified_iid(d, spec.n_parties, spec.seed)
    if spec.scheme == "two_party_ratio":
        if len(spec.ratios) != 1:
            raise PartitionError("two_party_ratio takes a single (u%, p%) ratio")
        return split_two_party_ratio(
            d, spec.attribute, tuple(spec.ratios[0]), spec.per_party, spec.seed
        )
    rows = list(zip([tuple(r) for r in spec.ratios], spec.sizes))
    return split_table_driven(d, spec.attribute, rows, spec.seed)


def split_stratified_iid(d: Dataset, n_parties: int, seed: int) -> Partition:
    """Equal-size shards whose joint (sensitive, label) cells mirror the source.

    Each cell is shuffled and the concatenated deck is dealt round-robin, so
    party sizes differ by at most one globally and per cell.
    """
    if n_parties < 1:
        raise PartitionError("n_parties must be >= 1")
    if n_parties > d.n_samples:
        raise PartitionError(f"cannot split {d.n_samples} samples among {n_parties} parties")
    rng = np.random.default_rng(seed)
    cells = _joint_cells(d)
    deck = np.concatenate([rng.permutation(cells[c]) for c in sorted(cells)])
    per_party = [np.sort(deck[j::n_parties]) for j in range(n_parties)]
    return Partition(
        parties=[d.subset(idx) for idx in per_party],
        provenance=per_party,
    )


def _label_cells(d: Dataset, attribute: str, group: int):
    """Sample indices of one sensitive group, split by label."""
    if attribute not in d.sensitive:
        raise PartitionError(f"unknown sensitive attribute {attribute!r}")
    s = d.sensitive[attribute]
    mask = s == group
    return {
        y: np.flatnonzero(mask & (d.labels == y)) for y in (0, 1)
    }


class _GroupPool:
    """Shuffled per-(group, label) pools consumed without replacement."""

    def __init__(self, d: Dataset, attribute: str, rng):
        self.pools = {}
        self.cursor = {}
        for g in (0, 1):
            for y, idx in _label_cells(d, attribute, g).items():
                self.pools[g, y] = rng.permutation(idx)
                self.cursor[g, y] = 0

    def available(self, group: int) -> int:
        return sum(
            len(self.pools[group, y]) - self.cursor[group, y] for y in (0, 1)
        )

    def draw_group(self, group: int, count: int):
        """Draw `count` samples of one group, label-stratified from what remains."""
        remaining = [len(self.pools[group, y]) - self.cursor[group, y] for y in (0, 1)]
        if count > sum(remaining):
            raise PartitionError(
                f"group {group} short by {count - sum(remaining)} samples"
            )
        take = largest_remainder(count, remaining)
        # Largest remainder can ask a cell for more than it holds when the other
        # cell is exhausted; shift the overflow.
        for y in (0, 1):
            over = take[y] - remaining[y]
            if over > 0:
                take[y] -= over
                take[1 - y] += over
        out = []
        for y in (0, 1):
            c = self.cursor[group, y]
            out.append(self.pools[group, y][c:c + take[y]])
            self.cursor[group, y] = c + take[y]
        return np.concatenate(out)


def split_two_party_ratio(d: Dataset, attribute: str, ratio, per_party: int, seed: int) -> Partition:
    """Mirrored two-party split: with ratio (a, b), Party 1 holds a% privileged
    and b% unprivileged samples; Party 2 holds the mirror. Labels within each
    group follow the source distribution."""
    a, b = ratio
    if abs(a + b - 100) > 1e-9:
        raise PartitionError(f"ratio {ratio} does not sum to 100")
    rng = np.random.default_rng(seed)
    pool = _GroupPool(d, attribute, rng)
    n_major, n_minor = largest_remainder(per_party, [a, b])
    # Mirrored parties jointly need n_major + n_minor samples from each group.
    for g in (0, 1):
        have = pool.available(g)
        if have < n_major + n_minor:
            raise PartitionError(
                f"group {g} has {have} samples, need {n_major + n_minor}"
            )
    p1 = np.sort(np.concatenate([pool.draw_group(1, n_major), pool.draw_group(0, n_minor)]))
    p2 = np.sort(np.concatenate([pool.draw_group(0, n_major), pool.draw_group(1, n_minor)]))
    return Partition(parties=[d.subset(p1), d.subset(p2)], provenance=[p1, p2])


def split_table_driven(d: Dataset, attribute: str, rows, seed: int) -> Partition:
    """One party per (ratio, size) row; ratio is (unprivileged%, privileged%)."""
    rng = np.random.default_rng(seed)
    pool = _GroupPool(d, attribute, rng)
    plans = []
    need = {0: 0, 1: 0}
    for i, ((u, p), size) in enumerate(rows):
        if abs(u + p - 100) > 1e-9:
            raise PartitionError(f"row {i}: ratio ({u}, {p}) does not sum to 100")
        n_u, n_p = largest_remainder(size, [u, p])
        plans.append((n_u, n_p))
        need[0] += n_u
        need[1] += n_p
    for g in (0, 1):
        if need[g] > pool.available(g):
            raise PartitionError(
                f"infeasible table: group {g} has {pool.available(g)} samples, need {need[g]}"
            )
    provenance = []
    for i, (n_u, n_p) in enumerate(plans):
        try:
            idx = np.sort(np.concatenate([pool.draw_group(0, n_u), pool.draw_group(1, n_p)]))
        except PartitionError as e:
            raise PartitionError(f"infeasible row {i}: {e}") from e
        provenance.append(idx)
    return Partition(parties=[d.subset(i) for i in provenance], provenance=provenance)
