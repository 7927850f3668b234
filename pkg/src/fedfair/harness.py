"""Experiment runner: config parsing, seeded replication, baseline, report emission.

A config describes one scenario (dataset, partition, mitigation, fusion,
training budget, seeds). Each replication re-partitions with its seed, runs
the pre-processing protocol and the federated rounds, and evaluates the global
model on a fixed stratified global test set. The centralized baseline trains
on the pooled training set with the same total epoch budget.
"""

import json
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np
import yaml

from .data import Dataset, load_dataset, stratified_split
from .federation import Party, preprocess, run_training, write_round_logs
from .metrics import METRIC_NAMES, fairness_report, underestimation_index
from .model import LogisticModel, TrainConfig, train_local
from .partition import PartitionSpec, make_partition
from .reweighing import local_reweigh


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    name: str
    dataset: str                  # adult | compas
    data_path: str                # canonical CSV from `prepare-data`
    attribute: str
    partition: PartitionSpec
    mitigation: str = "none"
    epsilon: float = None         # global_reweigh only
    eta: float = 0.0              # prejudice_remover only
    opt_in_fraction: float = 1.0  # fraction of parties applying the mitigation
    fusion: str = "fedavg_weighted"
    rounds: int = 20
    train: TrainConfig = field(default_factory=TrainConfig)
    seeds: list = field(default_factory=lambda: [1, 2, 3])
    replications: int = None
    test_fraction: float = 0.2
    split_seed: int = 0
    threshold: float = 0.5
    local_reports: bool = True
    output_dir: str = None

    def __post_init__(self):
        if self.replications is None:
            self.replications = len(self.seeds)
        if self.replications != len(self.seeds):
            raise ConfigError("replications must equal the number of seeds")
        if self.mitigation == "global_reweigh" and self.epsilon is None:
            raise ConfigError("global_reweigh requires epsilon")
        if self.mitigation == "prejudice_remover" and self.eta <= 0:
            raise ConfigError("prejudice_remover requires eta > 0")
        if not 0.0 <= self.opt_in_fraction <= 1.0:
            raise ConfigError("opt_in_fraction must lie in [0, 1]")

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        raw = dict(raw)
        part = dict(raw.pop("partition"))
        mit = dict(raw.pop("mitigation", {"method": "none"}))
        train_raw = dict(raw.pop("train", {}))
        if "lambda" in train_raw:
            train_raw["lam"] = train_raw.pop("lambda")
        train_raw.setdefault("attribute", raw.get("attribute"))
        mit_method = mit.pop("method", "none")
        cfg = cls(
            partition=PartitionSpec(**part),
            mitigation=mit_method,
            epsilon=mit.pop("epsilon", None),
            eta=mit.pop("eta", 0.0),
            opt_in_fraction=mit.pop("opt_in_fraction", 1.0),
            train=TrainConfig(
                **train_raw,
                eta=0.0,  # per-party eta is set when parties are built
            ),
            **raw,
        )
        if mit:
            raise ConfigError(f"unknown mitigation keys: {sorted(mit)}")
        return cfg

    @classmethod
    def from_yaml(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(yaml.safe_load(fh))

    def summary(self) -> dict:
        return {
            "name": self.name,
            "dataset": self.dataset,
            "attribute": self.attribute,
            "scheme": self.partition.scheme,
            "n_parties": self.partition.n_parties,
            "ratio": "-".join(str(int(v)) for v in self.partition.ratios[0])
            if self.partition.ratios
            else None,
            "mitigation": self.mitigation,
            "epsilon": self.epsilon,
            "eta": self.eta,
            "opt_in_fraction": self.opt_in_fraction,
            "fusion": self.fusion,
            "rounds": self.rounds,
            "seeds": list(self.seeds),
        }


@dataclass
class ExperimentResult:
    config: dict
    replications: list          # one record per seed
    aggregates: dict            # metric -> {mean, std, n}

    def to_dict(self) -> dict:
        return asdict(self)

    def mean(self, metric: str):
        return self.aggregates[metric]["mean"]

    def std(self, metric: str):
        return self.aggregates[metric]["std"]


def _aggregate(reports) -> dict:
    """Sample mean and n-1 standard deviation per metric, skipping undefined values."""
    out = {}
    for name in METRIC_NAMES:
        vals = [r[name] for r in reports if isinstance(r[name], (int, float))]
        if not vals:
            out[name] = {"mean": None, "std": None, "n": 0}
        else:
            arr = np.asarray(vals, dtype=float)
            std = float(arr.std(ddof=1)) if len(arr) > 1 else 0.0
            out[name] = {"mean": float(arr.mean()), "std": std, "n": len(arr)}
    return out


def _party_train_cfg(cfg: ExperimentConfig, mitigated: bool) -> TrainConfig:
    return TrainConfig(
        lam=cfg.train.lam,
        eta=cfg.eta if (mitigated and cfg.mitigation == "prejudice_remover") else 0.0,
        learning_rate=cfg.train.learning_rate,
        epochs=cfg.train.epochs,
        attribute=cfg.attribute,
        pr_estimate=cfg.train.pr_estimate,
    )


def build_parties(cfg: ExperimentConfig, partition) -> list:
    """Wrap partition shards as parties; the lowest-indexed ones opt in."""
    k = len(partition.parties)
    n_opt = int(round(cfg.opt_in_fraction * k)) if cfg.mitigation != "none" else 0
    parties = []
    for i, shard in enumerate(partition.parties):
        mitigated = i < n_opt
        parties.append(
            Party(
                id=i,
                data=shard,
                train_cfg=_party_train_cfg(cfg, mitigated),
                mitigation=cfg.mitigation if mitigated else "none",
                seed=i,
            )
        )
    return parties


def _split(cfg: ExperimentConfig):
    d = load_dataset(cfg.data_path)
    return stratified_split(d, cfg.test_fraction, cfg.split_seed)


def _run_replication(cfg: ExperimentConfig, train_set: Dataset, test_set: Dataset,
                     seed: int, out_dir: Path = None):
    spec = PartitionSpec(
        scheme=cfg.partition.scheme,
        n_parties=cfg.partition.n_parties,
        attribute=cfg.partition.attribute,
        ratios=cfg.partition.ratios,
        sizes=cfg.partition.sizes,
        per_party=cfg.partition.per_party,
        seed=seed,
    )
    partition = make_partition(train_set, spec)
    parties = build_parties(cfg, partition)
    parties, pre_log = preprocess(
        parties, cfg.mitigation, cfg.attribute, epsilon=cfg.epsilon, seed=seed
    )
    init = LogisticModel.zeros(train_set.n_features)
    model, logs = run_training(init, parties, cfg.fusion, cfg.rounds)
    report = fairness_report(model, test_set, cfg.attribute, cfg.threshold)

    record = {
        "seed": seed,
        "report": report.to_dict(),
        "per_party_uei": [
            underestimation_index(model, p.data, cfg.attribute) for p in parties
        ],
        "model": model.theta.tolist(),
    }
    if cfg.local_reports:
        local_cfg_epochs = cfg.rounds * cfg.train.epochs
        local = []
        for p in parties:
            solo_cfg = TrainConfig(
                lam=p.train_cfg.lam,
                eta=p.train_cfg.eta,
                learning_rate=p.train_cfg.learning_rate,
                epochs=local_cfg_epochs,
                attribute=cfg.attribute,
                pr_estimate=p.train_cfg.pr_estimate,
            )
            local_model = train_local(init, p.data, solo_cfg)
            local.append(fairness_report(local_model, test_set, cfg.attribute,
                                         cfg.threshold).to_dict())
        record["local_reports"] = local
    if out_dir is not None:
        write_round_logs(out_dir / f"rounds_seed{seed}.jsonl", logs, pre_log)
    return record, pre_log


def run_experiment(cfg: ExperimentConfig, out_dir=None) -> ExperimentResult:
    """Run every seeded replication; emits result JSON and per-round logs."""
    out = Path(out_dir or cfg.output_dir) if (out_dir or cfg.output_dir) else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    train_set, test_set = _split(cfg)
    records = []
    for seed in cfg.seeds:
        try:
            record, _ = _run_replication(cfg, train_set, test_set, seed, out)
        except Exception as e:
            raise type(e)(f"replication seed={seed}: {e}") from e
        records.append(record)
    result = ExperimentResult(
        config=cfg.summary(),
        replications=records,
        aggregates=_aggregate([r["report"] for r in records]),
    )
    if out is not None:
        with open(out / "result.json", "w") as fh:
            json.dump(result.to_dict(), fh, indent=2)
    return result


def run_baseline(cfg: ExperimentConfig, out_dir=None) -> ExperimentResult:
    """Centralized counterpart: pooled training set, same total epoch budget,
    centralized mitigation where one is configured."""
    out = Path(out_dir or cfg.output_dir) if (out_dir or cfg.output_dir) else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    train_set, test_set = _split(cfg)
    if cfg.mitigation in ("local_reweigh", "global_reweigh"):
        train_set = local_reweigh(train_set, cfg.attribute)
    train_cfg = TrainConfig(
        lam=cfg.train.lam,
        eta=cfg.eta if cfg.mitigation == "prejudice_remover" else 0.0,
        learning_rate=cfg.train.learning_rate,
        epochs=cfg.rounds * cfg.train.epochs,
        attribute=cfg.attribute,
        pr_estimate=cfg.train.pr_estimate,
    )
    init = LogisticModel.zeros(train_set.n_features)
    records = []
    for seed in cfg.seeds:
        model = train_local(init, train_set, train_cfg)
        records.append(
            {
                "seed": seed,
                "report": fairness_report(model, test_set, cfg.attribute,
                                          cfg.threshold).to_dict(),
                "model": model.theta.tolist(),
            }
        )
    result = ExperimentResult(
        config={**cfg.summary(), "baseline": True},
        replications=records,
        aggregates=_aggregate([r["report"] for r in records]),
    )
    if out is not None:
        with open(out / "baseline.json", "w") as fh:
            json.dump(result.to_dict(), fh, indent=2)
    return result


LAYOUT_FIELDS = {
    "by_parties": "n_parties",
    "by_ratio": "ratio",
    "by_epsilon": "epsilon",
    "by_fraction": "opt_in_fraction",
}


def emit_plot_data(results, layout: str, path) -> None:
    """CSV with one row per (x-value, method, metric): x, method, metric, mean, std."""
    if layout not in LAYOUT_FIELDS:
        raise ConfigError(f"unknown layout {layout!r}")
    key = LAYOUT_FIELDS[layout]
    rows = []
    for res in results:
        x = res.config.get(key)
        if x is None:
            raise ConfigError(
                f"result {res.config.get('name')!r} has no {key}; incompatible with {layout}"
            )
        method = res.config["mitigation"]
        if res.config.get("baseline"):
            method = f"baseline_{method}"
        for metric in METRIC_NAMES:
            agg = res.aggregates[metric]
            rows.append((x, method, metric, agg["mean"], agg["std"]))
    with open(path, "w") as fh:
        fh.write("x,method,metric,mean,std\n")
        for x, method, metric, mean, std in rows:
            mean = "n/a" if mean is None else repr(float(mean))
            std = "n/a" if std is None else repr(float(std))
            fh.write(f"{x},{method},{metric},{mean},{std}\n")
