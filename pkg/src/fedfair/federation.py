"""Synchronous federated round engine with reified message accounting.

Parties run in-process, but every aggregator-visible exchange is recorded as a
Message so the privacy boundary is testable: the aggregator only ever sees
parameter vectors, sample counts, and (for global reweighing) noisy count
tables.
"""

import json
from dataclasses import dataclass, field, asdict

import numpy as np

from .data import Dataset
from .model import LogisticModel, TrainConfig, train_local, TrainingDiverged
from .reweighing import (
    apply_weight_table,
    count_pairs,
    local_reweigh,
    merge_counts,
    noisy_counts,
    weights_from_counts,
)

MITIGATIONS = ("none", "local_reweigh", "global_reweigh", "prejudice_remover")
FUSIONS = ("simple_average", "fedavg_weighted")


class FederationError(ValueError):
    pass


@dataclass
class Party:
    id: int
    data: Dataset
    train_cfg: TrainConfig
    mitigation: str = "none"
    seed: int = 0

    def __post_init__(self):
        if self.mitigation not in MITIGATIONS:
            raise FederationError(f"unknown mitigation {self.mitigation!r}")
        if self.mitigation == "prejudice_remover" and self.train_cfg.eta <= 0:
            raise FederationError(f"party {self.id}: prejudice_remover requires eta > 0")


@dataclass
class Message:
    direction: str  # party_to_aggregator | aggregator_to_party
    kind: str       # params | noisy_counts | weight_table
    sender: str
    receiver: str
    payload: dict


@dataclass
class PreprocessLog:
    method: str
    extra_communication: float  # Table-1 style accounting: 0 or 1.5 rounds
    messages: list = field(default_factory=list)


@dataclass
class RoundLog:
    round_index: int
    party_ids: list
    party_sample_counts: list
    party_params: list
    fused_params: list
    messages: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def preprocess(parties, method: str, attribute: str, epsilon: float = None,
               seed: int = 0):
    """Run the pre-training mitigation phase; returns (parties, PreprocessLog).

    Parties whose `mitigation` equals `method` opt in. Local reweighing and
    prejudice removal exchange nothing; global reweighing costs one noisy-count
    upload per opted-in party plus one weight-table broadcast (accounted 1.5).
    """
    if method not in MITIGATIONS:
        raise FederationError(f"unknown mitigation {method!r}")
    if method in ("none", "prejudice_remover"):
        return list(parties), PreprocessLog(method=method, extra_communication=0.0)

    opted = [p for p in parties if p.mitigation == method]
    for p in opted:
        if attribute not in p.data.sensitive:
            raise FederationError(f"party {p.id} lacks sensitive attribute {attribute!r}")

    if method == "local_reweigh":
        out = [
            Party(
                id=p.id,
                data=local_reweigh(p.data, attribute) if p in opted else p.data,
                train_cfg=p.train_cfg,
                mitigation=p.mitigation,
                seed=p.seed,
            )
            for p in parties
        ]
        return out, PreprocessLog(method=method, extra_communication=0.0)

    # global_reweigh: parties upload DP-noised counts, the aggregator merges
    # them, computes the weight table, and broadcasts it back.
    if epsilon is None:
        raise FederationError("global_reweigh requires epsilon")
    log = PreprocessLog(method=method, extra_communication=1.5)
    tables = []
    for p in opted:
        table = noisy_counts(count_pairs(p.data, attribute), epsilon, seed=[seed, p.id])
        tables.append(table)
        log.messages.append(
            Message(
                direction="party_to_aggregator",
                kind="noisy_counts",
                sender=f"party:{p.id}",
                receiver="aggregator",
                payload={"noisy_counts": {f"{s},{y}": c for (s, y), c in table.counts.items()}},
            )
        )
    if not tables:
        return list(parties), PreprocessLog(method=method, extra_communication=0.0)
    wt = weights_from_counts(merge_counts(tables))
    log.messages.append(
        Message(
            direction="aggregator_to_party",
            kind="weight_table",
            sender="aggregator",
            receiver="all",
            payload={"weight_table": {f"{s},{y}": w for (s, y), w in wt.weights.items()}},
        )
    )
    out = [
        Party(
            id=p.id,
            data=apply_weight_table(p.data, wt) if p in opted else p.data,
            train_cfg=p.train_cfg,
            mitigation=p.mitigation,
            seed=p.seed,
        )
        for p in parties
    ]
    return out, log


def _fuse(params, counts, fusion: str) -> np.ndarray:
    if fusion not in FUSIONS:
        raise FederationError(f"unknown fusion strategy {fusion!r}")
    if len(params) == 1:  # single party: exact identity, no averaging rounding
        return np.array(params[0])
    if fusion == "simple_average":
        return np.mean(params, axis=0)
    if fusion == "fedavg_weighted":
        counts = np.asarray(counts, dtype=float)
        return np.average(params, axis=0, weights=counts)
    raise FederationError(f"unknown fusion strategy {fusion!r}")


def run_round(global_model: LogisticModel, parties, fusion: str,
              round_index: int = 0):
    """One synchronous round: broadcast, local training, fusion."""
    dim = len(global_model.theta)
    log = RoundLog(
        round_index=round_index,
        party_ids=[p.id for p in parties],
        party_sample_counts=[p.data.n_samples for p in parties],
        party_params=[],
        fused_params=[],
    )
    params = []
    for p in parties:
        if p.data.n_features + 1 != dim:
            raise FederationError(
                f"party {p.id}: feature dimension {p.data.n_features} does not match model"
            )
        log.messages.append(
            Message(
                direction="aggregator_to_party",
                kind="params",
                sender="aggregator",
                receiver=f"party:{p.id}",
                payload={"params": global_model.theta.tolist()},
            )
        )
        try:
            local = train_local(global_model, p.data, p.train_cfg)
        except TrainingDiverged as e:
            raise TrainingDiverged(f"party {p.id}: {e}") from e
        params.append(local.theta)
        log.party_params.append(local.theta.tolist())
        log.messages.append(
            Message(
                direction="party_to_aggregator",
                kind="params",
                sender=f"party:{p.id}",
                receiver="aggregator",
                payload={"params": local.theta.tolist(), "n_samples": p.data.n_samples},
            )
        )
    fused = _fuse(params, log.party_sample_counts, fusion)
    log.fused_params = fused.tolist()
    return LogisticModel(theta=fused), log


def run_training(init: LogisticModel, parties, fusion: str, rounds: int):
    """Sequentially compose `rounds` federated rounds from `init`."""
    if rounds < 1:
        raise FederationError("rounds must be >= 1")
    model = init
    logs = []
    for r in range(rounds):
        model, log = run_round(model, parties, fusion, round_index=r)
        logs.append(log)
    return model, logs


def write_round_logs(path, logs, preprocess_log: PreprocessLog = None) -> None:
    """JSON-lines: one preprocess record (if any) followed by one record per round."""
    with open(path, "w") as fh:
        if preprocess_log is not None:
            fh.write(json.dumps({"preprocess": asdict(preprocess_log)}) + "\n")
        for log in logs:
            fh.write(json.dumps(log.to_dict()) + "\n")
