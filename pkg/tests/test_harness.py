"""Experiment harness: config parsing, replication accounting, baseline, plot data."""

import json

import numpy as np
import pytest
import yaml

from fedfair.data import save_dataset
from fedfair.harness import (
    ConfigError,
    ExperimentConfig,
    ExperimentResult,
    build_parties,
    emit_plot_data,
    run_baseline,
    run_experiment,
)
from fedfair.partition import PartitionSpec, make_partition

from conftest import make_balanced


@pytest.fixture(scope="module")
def canon_path(tmp_path_factory):
    # 400 balanced samples so every stratified operation stays feasible.
    path = tmp_path_factory.mktemp("canon") / "balanced.csv"
    save_dataset(make_balanced(400), path)
    return path


def _raw_cfg(canon_path, **over):
    raw = {
        "name": "unit",
        "dataset": "adult",
        "data_path": str(canon_path),
        "attribute": "sex",
        "partition": {"scheme": "stratified_iid", "n_parties": 2},
        "mitigation": {"method": "none"},
        "train": {"lambda": 1.0, "learning_rate": 0.01, "epochs": 2},
        "rounds": 2,
        "seeds": [1, 2, 3],
        "local_reports": False,
    }
    raw.update(over)
    return raw


class TestConfigParsing:
    def test_from_yaml(self, tmp_path, canon_path):
        path = tmp_path / "c.yaml"
        path.write_text(yaml.safe_dump(_raw_cfg(canon_path)))
        cfg = ExperimentConfig.from_yaml(path)
        assert cfg.partition.scheme == "stratified_iid"
        assert cfg.train.lam == 1.0
        assert cfg.replications == 3

    def test_lambda_alias(self, canon_path):
        cfg = ExperimentConfig.from_dict(_raw_cfg(canon_path))
        assert cfg.train.lam == 1.0

    def test_mitigation_block(self, canon_path):
        raw = _raw_cfg(canon_path, mitigation={"method": "global_reweigh", "epsilon": 0.4})
        cfg = ExperimentConfig.from_dict(raw)
        assert cfg.mitigation == "global_reweigh" and cfg.epsilon == 0.4

    def test_global_reweigh_requires_epsilon(self, canon_path):
        with pytest.raises(ConfigError, match="epsilon"):
            ExperimentConfig.from_dict(_raw_cfg(canon_path, mitigation={"method": "global_reweigh"}))

    def test_prejudice_remover_requires_eta(self, canon_path):
        with pytest.raises(ConfigError, match="eta"):
            ExperimentConfig.from_dict(_raw_cfg(canon_path, mitigation={"method": "prejudice_remover"}))

    def test_replications_must_match_seeds(self, canon_path):
        with pytest.raises(ConfigError, match="replications"):
            ExperimentConfig.from_dict(_raw_cfg(canon_path, replications=5))

    def test_unknown_mitigation_key(self, canon_path):
        with pytest.raises(ConfigError, match="unknown mitigation keys"):
            ExperimentConfig.from_dict(_raw_cfg(canon_path, mitigation={"method": "none", "sigma": 1}))


class TestBuildParties:
    def test_opt_in_lowest_indexed(self, canon_path):
        cfg = ExperimentConfig.from_dict(
            _raw_cfg(
                canon_path,
                partition={"scheme": "stratified_iid", "n_parties": 8},
                mitigation={"method": "local_reweigh", "opt_in_fraction": 0.25},
            )
        )
        from fedfair.data import load_dataset

        part = make_partition(load_dataset(canon_path), PartitionSpec(scheme="stratified_iid", n_parties=8))
        parties = build_parties(cfg, part)
        assert [p.mitigation for p in parties] == ["local_reweigh"] * 2 + ["none"] * 6

    def test_no_mitigation_no_opt_in(self, canon_path):
        cfg = ExperimentConfig.from_dict(_raw_cfg(canon_path))
        from fedfair.data import load_dataset

        part = make_partition(load_dataset(canon_path), PartitionSpec(scheme="stratified_iid", n_parties=4))
        parties = build_parties(cfg, part)
        assert all(p.mitigation == "none" for p in parties)


class TestRunExperiment:
    def test_three_seeds_three_records(self, canon_path, tmp_path):
        cfg = ExperimentConfig.from_dict(_raw_cfg(canon_path))
        res = run_experiment(cfg, out_dir=tmp_path)
        assert len(res.replications) == 3
        for name in ("spd", "accuracy", "uei"):
            assert set(res.aggregates[name]) == {"mean", "std", "n"}
        assert (tmp_path / "result.json").exists()
        assert (tmp_path / "rounds_seed1.jsonl").exists()

    def test_per_party_uei_recorded(self, canon_path):
        cfg = ExperimentConfig.from_dict(_raw_cfg(canon_path))
        res = run_experiment(cfg)
        assert len(res.replications[0]["per_party_uei"]) == 2

    def test_determinism(self, canon_path):
        cfg = ExperimentConfig.from_dict(_raw_cfg(canon_path))
        a = run_experiment(cfg)
        b = run_experiment(cfg)
        assert a.replications[0]["model"] == b.replications[0]["model"]

    def test_single_party_control_matches_baseline(self, canon_path):
        raw = _raw_cfg(canon_path, partition={"scheme": "stratified_iid", "n_parties": 1})
        cfg = ExperimentConfig.from_dict(raw)
        fl = run_experiment(cfg)
        base = run_baseline(cfg)
        np.testing.assert_allclose(fl.replications[0]["model"], base.replications[0]["model"], atol=1e-10)


class TestBaseline:
    def test_rebalanced_rates(self, canon_path, tmp_path):
        raw = _raw_cfg(canon_path, mitigation={"method": "local_reweigh"})
        cfg = ExperimentConfig.from_dict(raw)
        res = run_baseline(cfg, out_dir=tmp_path)
        assert (tmp_path / "baseline.json").exists()
        assert res.config["baseline"] is True

    def test_same_model_every_seed(self, canon_path):
        cfg = ExperimentConfig.from_dict(_raw_cfg(canon_path))
        res = run_baseline(cfg)
        models = [r["model"] for r in res.replications]
        assert models[0] == models[1] == models[2]


class TestPlotData:
    def _result(self, canon_path, **over):
        cfg = ExperimentConfig.from_dict(_raw_cfg(canon_path, **over))
        return run_experiment(cfg)

    def test_rows_per_metric(self, canon_path, tmp_path):
        res = self._result(canon_path)
        out = tmp_path / "plot.csv"
        emit_plot_data([res], "by_parties", out)
        lines = out.read_text().splitlines()
        assert lines[0] == "x,method,metric,mean,std"
        assert len(lines) == 1 + 7  # one row per metric

    def test_two_methods_distinct_tags(self, canon_path, tmp_path):
        a = self._result(canon_path)
        b = self._result(canon_path, mitigation={"method": "local_reweigh"})
        out = tmp_path / "plot.csv"
        emit_plot_data([a, b], "by_parties", out)
        methods = {line.split(",")[1] for line in out.read_text().splitlines()[1:]}
        assert methods == {"none", "local_reweigh"}

    def test_unknown_layout(self, canon_path, tmp_path):
        with pytest.raises(ConfigError):
            emit_plot_data([self._result(canon_path)], "by_moon_phase", tmp_path / "p.csv")

    def test_missing_axis_field(self, canon_path, tmp_path):
        res = self._result(canon_path)
        with pytest.raises(ConfigError, match="has no"):
            emit_plot_data([res], "by_epsilon", tmp_path / "p.csv")


class TestResultRoundTrip:
    def test_json_round_trip(self, canon_path, tmp_path):
        cfg = ExperimentConfig.from_dict(_raw_cfg(canon_path))
        run_experiment(cfg, out_dir=tmp_path)
        with open(tmp_path / "result.json") as fh:
            raw = json.load(fh)
        res = ExperimentResult(config=raw["config"], replications=raw["replications"],
                               aggregates=raw["aggregates"])
        assert res.mean("accuracy") is not None
