"""Weighted l2-regularized logistic regression with an optional fairness regularizer.

The objective is a weighted SUM of per-sample negative log-likelihoods (not a
mean, so sample-count-weighted fusion composes correctly) plus lam/2 * ||theta||^2
plus eta * R, where R is the prejudice index of the model on the training set.
Training is deterministic full-batch gradient descent.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset


class ModelError(ValueError):
    pass


class TrainingDiverged(ModelError):
    pass


@dataclass
class LogisticModel:
    """Parameter vector over the features plus a trailing bias term."""

    theta: np.ndarray

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)
        if not np.isfinite(self.theta).all():
            raise ModelError("model parameters must be finite")

    @classmethod
    def zeros(cls, n_features: int) -> "LogisticModel":
        return cls(theta=np.zeros(n_features + 1))

    def scores(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != len(self.theta) - 1:
            raise ModelError(
                f"feature dimension {X.shape[1]} does not match model ({len(self.theta) - 1})"
            )
        return X @ self.theta[:-1] + self.theta[-1]

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        """P(y=1 | x) for each row; P(y=0) is the complement."""
        return _sigmoid(self.scores(X))

    def save(self, path, feature_names=None) -> None:
        payload = {"theta": self.theta.tolist()}
        if feature_names is not None:
            payload["feature_names"] = list(feature_names) + ["__bias__"]
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2)

    @classmethod
    def load(cls, path) -> "LogisticModel":
        with open(path) as fh:
            return cls(theta=np.array(json.load(fh)["theta"]))


@dataclass
class TrainConfig:
    lam: float = 1.0          # l2 strength (bias included)
    eta: float = 0.0          # fairness regularizer strength
    learning_rate: float = 0.01
    epochs: int = 50
    attribute: str = None     # required when eta > 0
    pr_estimate: str = "model"  # model | data: how P(y|s), P(y) are estimated

    def __post_init__(self):
        if self.lam < 0 or self.eta < 0:
            raise ModelError("lam and eta must be non-negative")
        if self.learning_rate <= 0:
            raise ModelError("learning_rate must be positive")
        if self.epochs < 0:
            raise ModelError("epochs must be non-negative")
        if self.eta > 0 and not self.attribute:
            raise ModelError("eta > 0 requires a sensitive attribute")
        if self.pr_estimate not in ("model", "data"):
            raise ModelError(f"unknown pr_estimate {self.pr_estimate!r}")


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=float)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _group_rates(m: LogisticModel, d: Dataset, attribute: str, estimate: str):
    """(q[s] = P(y=1|s), r = P(y=1)) under the chosen estimator.

    'model' averages the model's predicted probabilities over each group;
    'data' uses empirical label frequencies (constant in theta).
    """
    if attribute not in d.sensitive:
        raise ModelError(f"unknown sensitive attribute {attribute!r}")
    s = d.sensitive[attribute]
    if estimate == "model":
        p1 = m.predict_proba(d.features)
    else:
        p1 = d.labels.astype(float)
    q = {}
    for g in (0, 1):
        mask = s == g
        q[g] = p1[mask].mean() if mask.any() else None
    r = p1.mean()
    return q, r


def prejudice_index(m: LogisticModel, d: Dataset, attribute: str,
                    estimate: str = "model") -> float:
    """Sum over samples and labels of M[y|x] * ln(P(y|s) / P(y)).

    Measures how much the model's predictions depend on the sensitive
    attribute; zero when group-conditional prediction rates match the
    global rate.
    """
    s = d.sensitive.get(attribute)
    if s is None:
        raise ModelError(f"unknown sensitive attribute {attribute!r}")
    q, r = _group_rates(m, d, attribute, estimate)
    p1 = m.predict_proba(d.features)
    total = 0.0
    eps = 1e-12
    for g in (0, 1):
        mask = s == g
        if not mask.any():
            continue
        qg = q[g]
        pg = p1[mask]
        total += pg.sum() * (np.log(max(qg, eps)) - np.log(max(r, eps)))
        total += (1.0 - pg).sum() * (np.log(max(1 - qg, eps)) - np.log(max(1 - r, eps)))
    return float(total)


def _nll_terms(m: LogisticModel, d: Dataset):
    z = m.scores(d.features)
    # log(1 + e^z) - y*z, numerically stable
    return np.logaddexp(0.0, z) - d.labels * z


def loss(m: LogisticModel, d: Dataset, cfg: TrainConfig) -> float:
    """Weighted NLL sum + lam/2 ||theta||^2 + eta * prejudice index."""
    value = float(d.weights @ _nll_terms(m, d))
    value += 0.5 * cfg.lam * float(m.theta @ m.theta)
    if cfg.eta > 0:
        value += cfg.eta * prejudice_index(m, d, cfg.attribute, cfg.pr_estimate)
    if not np.isfinite(value):
        raise TrainingDiverged("non-finite loss")
    return value


def gradient(m: LogisticModel, d: Dataset, cfg: TrainConfig) -> np.ndarray:
    X = d.features
    p = m.predict_proba(X)
    resid = d.weights * (p - d.labels)
    g = np.concatenate([X.T @ resid, [resid.sum()]])
    g += cfg.lam * m.theta
    if cfg.eta > 0:
        s = d.sensitive[cfg.attribute]
        q, r = _group_rates(m, d, cfg.attribute, cfg.pr_estimate)
        # dR/dtheta = sum_i c_i p_i (1-p_i) x~_i with c_i = ln(q_s/(1-q_s)) - ln(r/(1-r));
        # under the model-induced estimates the chain-rule terms through q and r
        # cancel exactly, so only the direct dependence remains.
        eps = 1e-12
        c = np.empty(len(p))
        for g_val in (0, 1):
            mask = s == g_val
            if not mask.any():
                continue
            qg = min(max(q[g_val], eps), 1 - eps)
            rr = min(max(r, eps), 1 - eps)
            c[mask] = (np.log(qg) - np.log1p(-qg)) - (np.log(rr) - np.log1p(-rr))
        dr = c * p * (1.0 - p)
        g += cfg.eta * np.concatenate([X.T @ dr, [dr.sum()]])
    if not np.isfinite(g).all():
        raise TrainingDiverged("non-finite gradient")
    return g


def train_local(init: LogisticModel, d: Dataset, cfg: TrainConfig) -> LogisticModel:
    """`epochs` deterministic full-batch gradient-descent steps from `init`."""
    theta = init.theta.copy()
    m = LogisticModel(theta=theta)
    for epoch in range(cfg.epochs):
        try:
            g = gradient(m, d, cfg)
        except TrainingDiverged as e:
            raise TrainingDiverged(f"diverged at epoch {epoch}: {e}") from e
        theta = theta - cfg.learning_rate * g
        if not np.isfinite(theta).all():
            raise TrainingDiverged(f"non-finite parameters at epoch {epoch}")
        m = LogisticModel(theta=theta)
    return m
