"""k-nearest neighbours and naive Bayes models."""
from __future__ import annotations

import numpy as np

from .base import Model

_CHUNK = 256


def knn_indices(train: np.ndarray, query: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k nearest training rows (Euclidean); distance ties go
    to the lower row index."""
    out = np.empty((len(query), k), dtype=np.int64)
    for s in range(0, len(query), _CHUNK):
        q = query[s : s + _CHUNK]
        d = ((q[:, None, :] - train[None, :, :]) ** 2).sum(axis=2)
        out[s : s + _CHUNK] = np.argsort(d, axis=1, kind="stable")[:, :k]
    return out


class KNNModel(Model):
    algorithm = "knn"

    def __init__(self, params, seed=0, task="classification"):
        super().__init__(params, seed)
        self.task = task
        self.X = np.zeros((0, 0))
        self.y = np.zeros(0)

    def fit(self, X, y):
        self.n_features = X.shape[1]
        self.X = X.copy()
        self.y = self._init_classes(y) if self.task == "classification" else np.asarray(y, dtype=float).copy()
        return self

    def _neighbors(self, X):
        return knn_indices(self.X, X, min(self.params["k"], len(self.X)))

    def _proba(self, X):
        nb = self.y[self._neighbors(X)]
        K = len(self.classes)
        counts = np.stack([(nb == c).sum(axis=1) for c in range(K)], axis=1)
        return counts / nb.shape[1]

    def _predict(self, X):
        return self.y[self._neighbors(X)].mean(axis=1)

    def _state(self):
        return {"X": self.X.tolist(), "y": self.y.tolist()}

    def _load(self, state):
        self.X = np.array(state["X"], dtype=float).reshape(-1, self.n_features)
        dtype = np.int64 if self.task == "classification" else float
        self.y = np.array(state["y"], dtype=dtype)


def _normalize_log(jll):
    jll = jll - jll.max(axis=1, keepdims=True)
    p = np.exp(jll)
    return p / p.sum(axis=1, keepdims=True)


class GaussianNBModel(Model):
    """Per-class independent Gaussians; variances get ``var_smoothing`` times
    the largest feature variance added for stability."""

    algorithm = "gnb"
    task = "classification"

    def fit(self, X, y):
        codes = self._init_classes(y)
        self.n_features = X.shape[1]
        K = len(self.classes)
        eps = self.params["var_smoothing"] * max(float(X.var(axis=0).max()), 1e-300)
        self.theta = np.stack([X[codes == c].mean(axis=0) for c in range(K)])
        self.var = np.stack([X[codes == c].var(axis=0) for c in range(K)]) + eps
        self.log_prior = np.log(np.bincount(codes, minlength=K) / len(codes))
        return self

    def _proba(self, X):
        jll = []
        for c in range(len(self.classes)):
            ll = -0.5 * np.sum(np.log(2 * np.pi * self.var[c]))
            ll = ll - 0.5 * np.sum((X - self.theta[c]) ** 2 / self.var[c], axis=1)
            jll.append(self.log_prior[c] + ll)
        return _normalize_log(np.column_stack(jll))

    def _state(self):
        return {"theta": self.theta.tolist(), "var": self.var.tolist(), "log_prior": self.log_prior.tolist()}

    def _load(self, state):
        self.theta = np.array(state["theta"], dtype=float)
        self.var = np.array(state["var"], dtype=float)
        self.log_prior = np.array(state["log_prior"], dtype=float)


class BernoulliNBModel(Model):
    """Features binarized at ``binarize``; Laplace/Lidstone smoothing ``alpha``."""

    algorithm = "bnb"
    task = "classification"

    def fit(self, X, y):
        codes = self._init_classes(y)
        self.n_features = X.shape[1]
        K = len(self.classes)
        B = (X > self.params["binarize"]).astype(float)
        a = self.params["alpha"]
        counts = np.stack([B[codes == c].sum(axis=0) for c in range(K)])
        n_c = np.bincount(codes, minlength=K).astype(float)
        prob = (counts + a) / (n_c[:, None] + 2 * a)
        prob = np.clip(prob, 1e-300, 1 - 1e-16)
        self.log_p = np.log(prob)
        self.log_q = np.log1p(-prob)
        self.log_prior = np.log(n_c / n_c.sum())
        return self

    def _proba(self, X):
        B = (X > self.params["binarize"]).astype(float)
        jll = B @ self.log_p.T + (1 - B) @ self.log_q.T + self.log_prior
        return _normalize_log(jll)

    def _state(self):
        return {"log_p": self.log_p.tolist(), "log_q": self.log_q.tolist(), "log_prior": self.log_prior.tolist()}

    def _load(self, state):
        self.log_p = np.array(state["log_p"], dtype=float)
        self.log_q = np.array(state["log_q"], dtype=float)
        self.log_prior = np.array(state["log_prior"], dtype=float)
