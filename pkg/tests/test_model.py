"""Logistic model: probabilities, loss, prejudice index, gradients, training."""

import math

import numpy as np
import pytest

from fedfair.data import Dataset
from fedfair.model import (
    LogisticModel,
    ModelError,
    TrainConfig,
    TrainingDiverged,
    gradient,
    loss,
    prejudice_index,
    train_local,
)


def _model(theta):
    return LogisticModel(theta=np.asarray(theta, dtype=float))


class TestPredictProba:
    def test_zero_theta_gives_half(self, fixture10):
        m = LogisticModel.zeros(fixture10.n_features)
        np.testing.assert_allclose(m.predict_proba(fixture10.features), 0.5)

    def test_bias_ln3(self):
        m = _model([0.0, math.log(3)])
        assert m.predict_proba(np.zeros((1, 1)))[0] == pytest.approx(0.75, abs=1e-12)

    def test_negation_symmetry(self, fixture10):
        theta = np.linspace(-1, 1, fixture10.n_features + 1)
        p = _model(theta).predict_proba(fixture10.features)
        q = _model(-theta).predict_proba(fixture10.features)
        np.testing.assert_allclose(p, 1 - q, atol=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ModelError):
            _model([0.0, 0.0]).predict_proba(np.zeros((1, 3)))

    def test_save_load_round_trip(self, tmp_path):
        m = _model([0.25, -1.5, 3.0])
        m.save(tmp_path / "m.json", feature_names=["a", "b"])
        np.testing.assert_array_equal(LogisticModel.load(tmp_path / "m.json").theta, m.theta)


class TestLoss:
    def test_zero_theta_is_n_ln2(self, fixture10):
        m = LogisticModel.zeros(fixture10.n_features)
        cfg = TrainConfig(lam=0.0)
        assert loss(m, fixture10, cfg) == pytest.approx(10 * math.log(2), abs=1e-12)

    def test_l2_term_vanishes_at_zero(self, fixture10):
        m = LogisticModel.zeros(fixture10.n_features)
        cfg = TrainConfig(lam=5.0)
        assert loss(m, fixture10, cfg) == pytest.approx(10 * math.log(2), abs=1e-12)

    def test_straight_line_oracle(self, fixture10):
        theta = np.array([0.3, -0.7, 0.2])
        m = _model(theta)
        cfg = TrainConfig(lam=1.3)
        d = fixture10.with_weights(np.linspace(0.5, 2.0, 10))
        expected = 0.0
        for i in range(10):
            z = theta[0] * d.features[i, 0] + theta[1] * d.features[i, 1] + theta[2]
            p = 1.0 / (1.0 + math.exp(-z))
            expected += d.weights[i] * -(d.labels[i] * math.log(p) + (1 - d.labels[i]) * math.log(1 - p))
        expected += 0.5 * 1.3 * float(theta @ theta)
        assert loss(m, d, cfg) == pytest.approx(expected, abs=1e-10)


class TestPrejudiceIndex:
    def test_single_group_zero(self):
        d = Dataset(
            features=np.random.default_rng(0).standard_normal((6, 2)),
            labels=np.array([1, 0, 1, 0, 1, 0]),
            sensitive={"sex": np.ones(6, dtype=int)},
        )
        assert prejudice_index(_model([0.4, -0.2, 0.1]), d, "sex") == pytest.approx(0.0, abs=1e-12)

    def test_zero_theta_zero(self, fixture10):
        m = LogisticModel.zeros(fixture10.n_features)
        assert prejudice_index(m, fixture10, "sex") == pytest.approx(0.0, abs=1e-12)

    def test_term_by_term_oracle(self, fixture10):
        theta = np.array([0.5, -1.1, 0.3])
        m = _model(theta)
        p = [1.0 / (1.0 + math.exp(-(theta[0] * x0 + theta[1] * x1 + theta[2])))
             for x0, x1 in fixture10.features]
        s = fixture10.sensitive["sex"]
        q = {g: np.mean([p[i] for i in range(10) if s[i] == g]) for g in (0, 1)}
        r = np.mean(p)
        expected = 0.0
        for i in range(10):
            expected += p[i] * math.log(q[s[i]] / r)
            expected += (1 - p[i]) * math.log((1 - q[s[i]]) / (1 - r))
        assert prejudice_index(m, fixture10, "sex") == pytest.approx(expected, abs=1e-10)

    def test_data_estimate(self, fixture10):
        # 'data' estimates P(y|s), P(y) from labels: q1=4/6, q0=1/4, r=1/2.
        m = _model([0.0, 0.0, 0.0])
        got = prejudice_index(m, fixture10, "sex", estimate="data")
        expected = 0.0
        for g, n_g, q in ((1, 6, 4 / 6), (0, 4, 1 / 4)):
            expected += n_g * 0.5 * math.log(q / 0.5)
            expected += n_g * 0.5 * math.log((1 - q) / 0.5)
        assert got == pytest.approx(expected, abs=1e-12)


class TestGradient:
    def test_bias_coordinate_at_zero(self, fixture10):
        d = fixture10.with_weights(np.linspace(0.5, 2.0, 10))
        m = LogisticModel.zeros(d.n_features)
        g = gradient(m, d, TrainConfig(lam=0.0))
        expected = float(np.sum(d.weights * (0.5 - d.labels)))
        assert g[-1] == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("eta", [0.0, 0.8])
    def test_finite_differences(self, fixture10, eta):
        rng = np.random.default_rng(42)
        cfg = TrainConfig(lam=0.7, eta=eta, attribute="sex")
        d = fixture10.with_weights(rng.uniform(0.5, 2.0, 10))
        theta = rng.standard_normal(3)
        g = gradient(_model(theta), d, cfg)
        h = 1e-6
        for j in range(3):
            e = np.zeros(3)
            e[j] = h
            fd = (loss(_model(theta + e), d, cfg) - loss(_model(theta - e), d, cfg)) / (2 * h)
            assert abs(g[j] - fd) <= 1e-5 * max(1.0, abs(fd))

    def test_large_lambda_dominates(self, fixture10):
        theta = np.array([1.0, -2.0, 0.5])
        g = gradient(_model(theta), fixture10, TrainConfig(lam=1e8))
        np.testing.assert_allclose(g / 1e8, theta, atol=1e-6)


class TestTrainLocal:
    def test_zero_epochs_identity(self, fixture10):
        init = _model([0.1, 0.2, 0.3])
        out = train_local(init, fixture10, TrainConfig(epochs=0))
        np.testing.assert_array_equal(out.theta, init.theta)

    def test_loss_decreases(self):
        X = np.array([[0.0], [1.0], [2.0], [3.0]])
        d = Dataset(features=X, labels=np.array([0, 0, 1, 1]), sensitive={"sex": [0, 1, 0, 1]})
        cfg = TrainConfig(lam=0.01, learning_rate=0.1, epochs=1)
        m = LogisticModel.zeros(1)
        prev = loss(m, d, cfg)
        for _ in range(20):
            m = train_local(m, d, cfg)
            cur = loss(m, d, cfg)
            assert cur < prev
            prev = cur

    def test_weight_double_lr_half_equivalence(self, fixture10):
        # Sum-form loss: doubling all weights doubles the gradient, so halving
        # the step size reproduces the same trajectory (up to the l2 term,
        # hence lam=0 here).
        cfg_a = TrainConfig(lam=0.0, learning_rate=0.02, epochs=30)
        cfg_b = TrainConfig(lam=0.0, learning_rate=0.01, epochs=30)
        init = LogisticModel.zeros(fixture10.n_features)
        a = train_local(init, fixture10, cfg_a)
        b = train_local(init, fixture10.with_weights(2 * fixture10.weights), cfg_b)
        np.testing.assert_allclose(a.theta, b.theta, atol=1e-10)

    @pytest.mark.filterwarnings("ignore:overflow")
    def test_divergence_raises(self, fixture10):
        # lr*lam >> 2 makes the l2 recursion explode geometrically
        cfg = TrainConfig(lam=1.0, learning_rate=1e8, epochs=200)
        with pytest.raises(TrainingDiverged):
            train_local(LogisticModel.zeros(fixture10.n_features), fixture10, cfg)


class TestTrainConfigValidation:
    def test_eta_requires_attribute(self):
        with pytest.raises(ModelError):
            TrainConfig(eta=1.0)

    def test_negative_lam(self):
        with pytest.raises(ModelError):
            TrainConfig(lam=-1.0)

    def test_bad_pr_estimate(self):
        with pytest.raises(ModelError):
            TrainConfig(pr_estimate="guess")
