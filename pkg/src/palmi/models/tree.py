"""CART trees and the tree ensembles built from them."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _splitter as K


@dataclass(frozen=True)
class Tree:
    """Flat node arrays; ``feature == -1`` marks a leaf.

    ``value`` is the class distribution (classification) or the mean target
    (regression, shape ``(n_nodes, 1)``).
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    importances: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def depth(self) -> int:
        depth = np.zeros(self.n_nodes, dtype=int)
        for i in range(self.n_nodes):
            if self.feature[i] >= 0:
                depth[self.left[i]] = depth[self.right[i]] = depth[i] + 1
        return int(depth.max())

    def apply(self, X) -> np.ndarray:
        return K.apply_tree(np.ascontiguousarray(X, dtype=float), self.feature, self.threshold, self.left, self.right)

    def predict_value(self, X) -> np.ndarray:
        return self.value[self.apply(X)]

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
            "importances": self.importances.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Tree":
        return cls(
            np.array(d["feature"], dtype=np.int64),
            np.array(d["threshold"], dtype=float),
            np.array(d["left"], dtype=np.int64),
            np.array(d["right"], dtype=np.int64),
            np.array(d["value"], dtype=float),
            np.array(d["importances"], dtype=float),
        )


def n_features_to_try(max_features, n_features: int) -> int:
    if max_features is None:
        return n_features
    if max_features == "sqrt":
        return max(1, int(np.sqrt(n_features)))
    return max(1, min(n_features, int(round(float(max_features) * n_features))))


def presort(X) -> np.ndarray:
    """Row order of every column, shape ``(n_features, n_rows)``."""
    return np.ascontiguousarray(np.argsort(np.asarray(X, dtype=float), axis=0, kind="stable").T)


def build_tree(
    X: np.ndarray,
    y: np.ndarray,
    *,
    n_classes: int = 0,
    idx: np.ndarray | None = None,
    weights: np.ndarray | None = None,
    max_depth: int | None = None,
    min_samples_split: int = 2,
    min_samples_leaf: int = 1,
    max_features=None,
    random_splits: bool = False,
    rng: np.random.Generator | None = None,
    presorted: np.ndarray | None = None,
) -> Tree:
    """Grow one tree depth-first.

    ``n_classes > 0`` selects Gini classification on integer codes
    ``0..n_classes-1``; ``n_classes == 0`` grows a variance-reduction
    regression tree. Splits are ``x <= threshold`` goes left.
    ``presorted`` (from ``presort(X)``) saves re-sorting the columns when
    many trees are grown on the same matrix.
    """
    X = np.ascontiguousarray(X, dtype=float)
    classify = n_classes > 0
    y = np.ascontiguousarray(y, dtype=np.int64 if classify else float)
    n, m = X.shape
    samples = np.arange(n, dtype=np.int64) if idx is None else np.array(idx, dtype=np.int64)
    w = np.ones(len(samples)) if weights is None else np.array(weights, dtype=float)
    rng = rng if rng is not None else np.random.default_rng(0)
    seed = int(rng.integers(0, 2**32 - 1))
    n_try = n_features_to_try(max_features, m)
    depth = -1 if max_depth is None else int(max_depth)
    y_cls = y if classify else np.zeros(1, dtype=np.int64)
    y_reg = np.zeros(1) if classify else y
    G = presort(X) if presorted is None else presorted
    feature, threshold, left, right, value, importances = K.grow(
        X, G, y_cls, y_reg, samples, w, int(n_classes), depth, int(min_samples_split),
        int(min_samples_leaf), n_try, bool(random_splits), seed,
    )
    total = importances.sum()
    if total > 0:
        importances = importances / total
    return Tree(feature, threshold, left, right, value, importances)
