"""Single trees, randomized forests and boosting, for both tasks."""
from __future__ import annotations

import numpy as np

from .base import Model
from .tree import Tree, build_tree, presort


def _tree_kwargs(p: dict) -> dict:
    return {
        "max_depth": p.get("max_depth"),
        "min_samples_split": p.get("min_samples_split", 2),
        "min_samples_leaf": p.get("min_samples_leaf", 1),
        "max_features": p.get("max_features"),
    }


class TreeEnsemble(Model):
    """Averages leaf values over trees.

    For classifiers a leaf value is the class-frequency vector of the leaf,
    so probabilities are mean leaf frequencies.
    """

    def __init__(self, params, seed=0, task="classification"):
        super().__init__(params, seed)
        self.task = task
        self.trees: list[Tree] = []

    def _n_classes(self):
        return len(self.classes) if self.task == "classification" else 0

    def _raw(self, X):
        out = self.trees[0].predict_value(X)
        for t in self.trees[1:]:
            out = out + t.predict_value(X)
        return out / len(self.trees)

    def _proba(self, X):
        p = self._raw(X)
        return p / p.sum(axis=1, keepdims=True)

    def _predict(self, X):
        return self._raw(X)[:, 0]

    @property
    def feature_importances(self):
        return np.mean([t.importances for t in self.trees], axis=0)

    def _state(self):
        return {"trees": [t.to_dict() for t in self.trees]}

    def _load(self, state):
        self.trees = [Tree.from_dict(t) for t in state["trees"]]


class DecisionTreeModel(TreeEnsemble):
    algorithm = "dt"

    def fit(self, X, y):
        self.n_features = X.shape[1]
        target = self._init_classes(y) if self.task == "classification" else y
        rng = np.random.default_rng([self.seed, 0])
        self.trees = [build_tree(X, target, n_classes=self._n_classes(), rng=rng, **_tree_kwargs(self.params))]
        return self


class ForestModel(TreeEnsemble):
    """Random forest, extra-trees and bagging share this class.

    rf: bootstrap rows (or a ``subsample`` fraction without replacement when
    below 1), random feature subset per split. extra_trees: all rows, random
    thresholds. bagging: bootstrap of ``subsample * n`` rows, all features.
    """

    def __init__(self, params, seed=0, task="classification", algorithm="rf"):
        super().__init__(params, seed, task)
        self.algorithm = algorithm

    def fit(self, X, y):
        p = self.params
        n = X.shape[0]
        self.n_features = X.shape[1]
        target = self._init_classes(y) if self.task == "classification" else y
        kwargs = _tree_kwargs(p)
        G = presort(X)
        self.trees = []
        for t in range(p["n_estimators"]):
            rng = np.random.default_rng([self.seed, t])
            sub = p.get("subsample", 1.0)
            if self.algorithm == "extra_trees":
                idx = np.arange(n, dtype=np.int64)
            elif self.algorithm == "bagging":
                idx = rng.integers(0, n, size=max(1, int(round(sub * n))))
            elif sub < 1.0:
                idx = np.sort(rng.choice(n, size=max(1, int(round(sub * n))), replace=False))
            else:
                idx = rng.integers(0, n, size=n)
            self.trees.append(
                build_tree(
                    X, target, presorted=G, n_classes=self._n_classes(), idx=idx.astype(np.int64), rng=rng,
                    random_splits=self.algorithm == "extra_trees", **kwargs,
                )
            )
        return self


class AdaBoostModel(Model):
    """SAMME for classification, AdaBoost.R2 (linear loss) for regression."""

    algorithm = "adaboost"

    def __init__(self, params, seed=0, task="classification"):
        super().__init__(params, seed)
        self.task = task
        self.trees: list[Tree] = []
        self.alphas = np.zeros(0)

    def fit(self, X, y):
        self.n_features = X.shape[1]
        if self.task == "classification":
            self._fit_samme(X, self._init_classes(y))
        else:
            self._fit_r2(X, np.asarray(y, dtype=float))
        return self

    def _fit_samme(self, X, codes):
        p = self.params
        n, K = len(codes), len(self.classes)
        w = np.full(n, 1.0 / n)
        idx = np.arange(n, dtype=np.int64)
        G = presort(X)
        trees, alphas = [], []
        for m in range(p["n_estimators"]):
            rng = np.random.default_rng([self.seed, m])
            tree = build_tree(
                X, codes, n_classes=K, idx=idx, weights=w * n, max_depth=p["max_depth"], rng=rng, presorted=G
            )
            miss = np.argmax(tree.predict_value(X), axis=1) != codes
            err = float(w[miss].sum() / w.sum())
            if err <= 0.0:
                trees.append(tree)
                alphas.append(1.0)
                break
            if err >= 1.0 - 1.0 / K:
                if not trees:
                    trees.append(tree)
                    alphas.append(1.0)
                break
            alpha = p["learning_rate"] * (np.log((1.0 - err) / err) + np.log(K - 1.0))
            trees.append(tree)
            alphas.append(alpha)
            w = w * np.exp(alpha * miss)
            w /= w.sum()
        self.trees, self.alphas = trees, np.array(alphas)

    def _fit_r2(self, X, y):
        p = self.params
        n = len(y)
        w = np.full(n, 1.0 / n)
        G = presort(X)
        trees, alphas = [], []
        for m in range(p["n_estimators"]):
            rng = np.random.default_rng([self.seed, m])
            idx = rng.choice(n, size=n, replace=True, p=w).astype(np.int64)
            tree = build_tree(X, y, idx=idx, max_depth=p["max_depth"], rng=rng, presorted=G)
            err = np.abs(tree.predict_value(X)[:, 0] - y)
            D = err.max()
            if D <= 0.0:
                trees.append(tree)
                alphas.append(1.0)
                break
            loss = err / D
            avg = float((w * loss).sum())
            if avg >= 0.5:
                if not trees:
                    trees.append(tree)
                    alphas.append(1.0)
                break
            beta = avg / (1.0 - avg)
            trees.append(tree)
            alphas.append(p["learning_rate"] * np.log(1.0 / beta))
            w = w * beta ** ((1.0 - loss) * p["learning_rate"])
            w /= w.sum()
        self.trees, self.alphas = trees, np.array(alphas)

    def _proba(self, X):
        votes = np.zeros((X.shape[0], len(self.classes)))
        rows = np.arange(X.shape[0])
        for tree, a in zip(self.trees, self.alphas):
            votes[rows, np.argmax(tree.predict_value(X), axis=1)] += a
        return votes / votes.sum(axis=1, keepdims=True)

    def _predict(self, X):
        # weighted median of the member predictions
        preds = np.column_stack([t.predict_value(X)[:, 0] for t in self.trees])
        order = np.argsort(preds, axis=1, kind="stable")
        cw = np.cumsum(self.alphas[order], axis=1)
        pick = np.argmax(cw >= 0.5 * cw[:, -1:], axis=1)
        return preds[np.arange(len(preds)), order[np.arange(len(preds)), pick]]

    @property
    def feature_importances(self):
        return np.average([t.importances for t in self.trees], axis=0, weights=self.alphas)

    def _state(self):
        return {"trees": [t.to_dict() for t in self.trees], "alphas": self.alphas.tolist()}

    def _load(self, state):
        self.trees = [Tree.from_dict(t) for t in state["trees"]]
        self.alphas = np.array(state["alphas"], dtype=float)


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


class GradientBoostingModel(Model):
    """Squared loss for regression; one-vs-rest logistic loss per class for
    classification, with Newton-step leaf values."""

    algorithm = "gboost"

    def __init__(self, params, seed=0, task="classification"):
        super().__init__(params, seed)
        self.task = task
        self.init = np.zeros(0)
        self.stages: list[list[Tree]] = []
        self.train_loss: list[float] = []

    def fit(self, X, y):
        p = self.params
        n = X.shape[0]
        self.n_features = X.shape[1]
        if self.task == "classification":
            codes = self._init_classes(y)
            Y = np.eye(len(self.classes))[codes]
            prior = np.clip(Y.mean(axis=0), 1e-12, 1 - 1e-12)
            self.init = np.log(prior / (1 - prior))
        else:
            Y = np.asarray(y, dtype=float).reshape(-1, 1)
            self.init = np.array([Y.mean()])
        F = np.tile(self.init, (n, 1))
        kwargs = {
            "max_depth": p["max_depth"],
            "min_samples_split": p["min_samples_split"],
            "min_samples_leaf": p["min_samples_leaf"],
        }
        G = presort(X)
        self.stages, self.train_loss = [], [self._loss(Y, F)]
        for m in range(p["n_estimators"]):
            rng = np.random.default_rng([self.seed, m])
            if p["subsample"] < 1.0:
                idx = np.sort(rng.choice(n, size=max(1, int(round(p["subsample"] * n))), replace=False))
            else:
                idx = np.arange(n)
            idx = idx.astype(np.int64)
            stage = []
            for k in range(Y.shape[1]):
                if self.task == "classification":
                    prob = _sigmoid(F[:, k])
                    resid = Y[:, k] - prob
                    tree = build_tree(X, resid, idx=idx, rng=rng, presorted=G, **kwargs)
                    leaves = tree.apply(X[idx])
                    num = np.bincount(leaves, resid[idx], minlength=tree.n_nodes)
                    hess = prob[idx] * (1 - prob[idx])
                    den = np.bincount(leaves, hess, minlength=tree.n_nodes)
                    value = np.where(den > 1e-12, num / np.maximum(den, 1e-12), 0.0).reshape(-1, 1)
                    tree = Tree(tree.feature, tree.threshold, tree.left, tree.right, value, tree.importances)
                else:
                    tree = build_tree(X, Y[:, 0] - F[:, 0], idx=idx, rng=rng, presorted=G, **kwargs)
                F[:, k] += p["learning_rate"] * tree.predict_value(X)[:, 0]
                stage.append(tree)
            self.stages.append(stage)
            self.train_loss.append(self._loss(Y, F))
        return self

    def _loss(self, Y, F):
        if self.task == "classification":
            # mean binary log-loss summed over the one-vs-rest problems
            return float(np.mean(np.sum(np.logaddexp(0, F) - Y * F, axis=1)))
        return float(np.mean((Y[:, 0] - F[:, 0]) ** 2))

    def _raw(self, X):
        F = np.tile(self.init, (X.shape[0], 1))
        lr = self.params["learning_rate"]
        for stage in self.stages:
            for k, tree in enumerate(stage):
                F[:, k] += lr * tree.predict_value(X)[:, 0]
        return F

    def _proba(self, X):
        P = _sigmoid(self._raw(X))
        return P / P.sum(axis=1, keepdims=True)

    def _predict(self, X):
        return self._raw(X)[:, 0]

    @property
    def feature_importances(self):
        return np.mean([t.importances for stage in self.stages for t in stage], axis=0)

    def _state(self):
        return {
            "init": self.init.tolist(),
            "stages": [[t.to_dict() for t in s] for s in self.stages],
            "train_loss": self.train_loss,
        }

    def _load(self, state):
        self.init = np.array(state["init"], dtype=float)
        self.stages = [[Tree.from_dict(t) for t in s] for s in state["stages"]]
        self.train_loss = list(state["train_loss"])
