"""Linear models: least squares, ridge, lasso/elastic net and multinomial
logistic regression."""
from __future__ import annotations

import numpy as np
from numba import njit

from .base import Model


@njit(cache=True)
def coordinate_descent(X, y, l1, l2, max_iter, tol):
    """Cyclic coordinate descent for

        (1 / 2n) ||y - X b||^2 + l1 ||b||_1 + (l2 / 2) ||b||^2

    on centred X and y. Stops when the largest coefficient change of a sweep
    falls below ``tol`` times the largest coefficient. Returns (b, sweeps).
    """
    n, m = X.shape
    b = np.zeros(m)
    resid = y.copy()
    norms = np.zeros(m)
    for j in range(m):
        norms[j] = (X[:, j] ** 2).sum() / n
    sweeps = 0
    for it in range(max_iter):
        sweeps = it + 1
        max_delta = 0.0
        max_b = 0.0
        for j in range(m):
            if norms[j] == 0.0:
                continue
            old = b[j]
            rho = old * norms[j]
            for i in range(n):
                rho += X[i, j] * resid[i] / n
            if rho > l1:
                new = (rho - l1) / (norms[j] + l2)
            elif rho < -l1:
                new = (rho + l1) / (norms[j] + l2)
            else:
                new = 0.0
            if new != old:
                d = new - old
                for i in range(n):
                    resid[i] -= d * X[i, j]
                b[j] = new
                if abs(d) > max_delta:
                    max_delta = abs(d)
            if abs(new) > max_b:
                max_b = abs(new)
        if max_delta <= tol * max(max_b, 1.0):
            break
    return b, sweeps


class LinearRegressionModel(Model):
    """ols, ridge, lasso and enet. The intercept is never penalized."""

    task = "regression"

    def __init__(self, params, seed=0, algorithm="ols"):
        super().__init__(params, seed)
        self.algorithm = algorithm
        self.coef = np.zeros(0)
        self.intercept = 0.0
        self.n_iter = 0

    def fit(self, X, y):
        y = np.asarray(y, dtype=float)
        self.n_features = X.shape[1]
        x_mean = X.mean(axis=0)
        y_mean = y.mean()
        Xc = X - x_mean
        yc = y - y_mean
        p = self.params
        if self.algorithm == "ols":
            self.coef = self._solve(Xc.T @ Xc, Xc.T @ yc)
        elif self.algorithm == "ridge":
            A = Xc.T @ Xc + p["alpha"] * np.eye(X.shape[1])
            self.coef = self._solve(A, Xc.T @ yc)
        else:
            ratio = 1.0 if self.algorithm == "lasso" else p["l1_ratio"]
            self.coef, self.n_iter = coordinate_descent(
                np.ascontiguousarray(Xc), yc, p["alpha"] * ratio, p["alpha"] * (1.0 - ratio), p["max_iter"], p["tol"]
            )
        self.intercept = float(y_mean - x_mean @ self.coef)
        return self

    @staticmethod
    def _solve(A, b):
        # normal equations; rank deficiency falls back to the pseudo-inverse
        if np.linalg.matrix_rank(A) == A.shape[0]:
            return np.linalg.solve(A, b)
        return np.linalg.pinv(A) @ b

    def _predict(self, X):
        return X @ self.coef + self.intercept

    @property
    def feature_importances(self):
        return np.abs(self.coef)

    def _state(self):
        return {"coef": self.coef.tolist(), "intercept": self.intercept, "n_iter": self.n_iter}

    def _load(self, state):
        self.coef = np.array(state["coef"], dtype=float)
        self.intercept = float(state["intercept"])
        self.n_iter = int(state["n_iter"])


def _softmax(Z):
    Z = Z - Z.max(axis=1, keepdims=True)
    E = np.exp(Z)
    return E / E.sum(axis=1, keepdims=True)


class LogisticRegressionModel(Model):
    """Multinomial softmax regression with an L2 penalty, fitted by gradient
    descent with Armijo backtracking.

    Objective: sum of negative log-likelihoods + alpha / 2 * ||W||^2 (the
    intercepts are not penalized).
    """

    algorithm = "logreg"
    task = "classification"

    def __init__(self, params, seed=0):
        super().__init__(params, seed)
        self.W = np.zeros((0, 0))
        self.b = np.zeros(0)
        self.n_iter = 0

    def _objective(self, X, Y, W, b):
        Z = X @ W + b
        zmax = Z.max(axis=1, keepdims=True)
        lse = np.log(np.exp(Z - zmax).sum(axis=1)) + zmax[:, 0]
        nll = float((lse - (Z * Y).sum(axis=1)).sum())
        return nll + 0.5 * self.params["alpha"] * float((W * W).sum())

    def fit(self, X, y):
        codes = self._init_classes(y)
        self.n_features = X.shape[1]
        K = len(self.classes)
        Y = np.eye(K)[codes]
        alpha = self.params["alpha"]
        W = np.zeros((X.shape[1], K))
        b = np.zeros(K)
        f = self._objective(X, Y, W, b)
        step = 1.0 / (0.25 * np.linalg.norm(X, 2) ** 2 + alpha + len(X))
        it = 0
        for it in range(1, self.params["max_iter"] + 1):
            R = _softmax(X @ W + b) - Y
            gW = X.T @ R + alpha * W
            gb = R.sum(axis=0)
            gnorm2 = float((gW * gW).sum() + (gb * gb).sum())
            if np.sqrt(gnorm2) <= self.params["tol"] * len(X):
                break
            step *= 2.0
            while True:
                W_new = W - step * gW
                b_new = b - step * gb
                f_new = self._objective(X, Y, W_new, b_new)
                if f_new <= f - 0.5 * step * gnorm2 or step < 1e-16:
                    break
                step *= 0.5
            if f - f_new <= 1e-12 * max(abs(f), 1.0):
                W, b, f = W_new, b_new, f_new
                break
            W, b, f = W_new, b_new, f_new
        self.W, self.b, self.n_iter = W, b, it
        return self

    def _proba(self, X):
        return _softmax(X @ self.W + self.b)

    @property
    def feature_importances(self):
        return np.abs(self.W).mean(axis=1)

    def _state(self):
        return {"W": self.W.tolist(), "b": self.b.tolist(), "n_iter": self.n_iter}

    def _load(self, state):
        self.W = np.array(state["W"], dtype=float)
        self.b = np.array(state["b"], dtype=float)
        self.n_iter = int(state["n_iter"])
