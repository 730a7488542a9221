"""Model specification, hyperparameter schemas and the common model API."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..errors import DimensionMismatch, NonFinite, SpecInvalid

TASKS = ("classification", "regression")


@dataclass(frozen=True)
class Param:
    kind: str  # int, real, fraction, depth, max_features
    default: Any
    low: float | None = None


def _tree_params(max_features_default) -> dict:
    return {
        "max_depth": Param("depth", None),
        "min_samples_split": Param("int", 2, 2),
        "min_samples_leaf": Param("int", 1, 1),
        "max_features": Param("max_features", max_features_default),
    }


def _forest_params(max_features_default) -> dict:
    return {
        "n_estimators": Param("int", 100, 1),
        **_tree_params(max_features_default),
        "subsample": Param("fraction", 1.0),
        # accepted for configuration compatibility only; forests ignore it
        "learning_rate": Param("real", 0.1, 0.0),
    }


def _schemas(task: str) -> dict[str, dict[str, Param]]:
    clf = task == "classification"
    mf = "sqrt" if clf else 1.0
    schemas = {
        "dt": _tree_params(1.0),
        "rf": _forest_params(mf),
        "extra_trees": {k: v for k, v in _forest_params(mf).items() if k not in ("subsample", "learning_rate")},
        "bagging": {"n_estimators": Param("int", 10, 1), **_tree_params(1.0), "subsample": Param("fraction", 1.0)},
        "adaboost": {
            "n_estimators": Param("int", 50, 1),
            "learning_rate": Param("real", 1.0, 0.0),
            "max_depth": Param("depth", 1 if clf else 3),
        },
        "gboost": {
            "n_estimators": Param("int", 100, 1),
            "learning_rate": Param("real", 0.1, 0.0),
            "max_depth": Param("depth", 3),
            "min_samples_split": Param("int", 2, 2),
            "min_samples_leaf": Param("int", 1, 1),
            "subsample": Param("fraction", 1.0),
        },
        "knn": {"k": Param("int", 5, 1)},
    }
    if clf:
        schemas.update(
            gnb={"var_smoothing": Param("real", 1e-9, 0.0)},
            bnb={"alpha": Param("real", 1.0, 0.0), "binarize": Param("real", 0.0)},
            logreg={"alpha": Param("real", 1.0, 0.0), "max_iter": Param("int", 1000, 1), "tol": Param("real", 1e-6, 0.0)},
        )
    else:
        schemas.update(
            ols={},
            ridge={"alpha": Param("real", 1.0, 0.0)},
            lasso={"alpha": Param("real", 1.0, 0.0), "max_iter": Param("int", 10000, 1), "tol": Param("real", 1e-6, 0.0)},
            enet={
                "alpha": Param("real", 1.0, 0.0),
                "l1_ratio": Param("fraction", 0.5),
                "max_iter": Param("int", 10000, 1),
                "tol": Param("real", 1e-6, 0.0),
            },
        )
    return schemas


SCHEMAS = {task: _schemas(task) for task in TASKS}
CLASSIFIERS = tuple(SCHEMAS["classification"])
REGRESSORS = tuple(SCHEMAS["regression"])


def _check_value(name: str, p: Param, value):
    if p.kind == "depth":
        if value is None:
            return None
        p = Param("int", None, 1)
    if p.kind == "max_features":
        if value is None or value == "sqrt":
            return value
        p = Param("fraction", None)
    if p.kind == "int":
        if isinstance(value, bool) or not float(value).is_integer():
            raise SpecInvalid(f"{name} must be an integer, got {value!r}")
        value = int(value)
        if p.low is not None and value < p.low:
            raise SpecInvalid(f"{name} must be >= {p.low}, got {value}")
        return value
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise SpecInvalid(f"{name} must be a number, got {value!r}") from None
    if not math.isfinite(value):
        raise SpecInvalid(f"{name} must be finite")
    if p.kind == "fraction" and not 0.0 < value <= 1.0:
        raise SpecInvalid(f"{name} must lie in (0, 1], got {value}")
    if p.kind == "real" and p.low is not None and value < p.low:
        raise SpecInvalid(f"{name} must be >= {p.low}, got {value}")
    return value


@dataclass(frozen=True)
class ModelSpec:
    """Algorithm id plus hyperparameters; unspecified ones take defaults."""

    algorithm: str
    task: str = "classification"
    params: dict = field(default_factory=dict)
    seed: int = 0

    def validated(self) -> dict:
        """Full hyperparameter map (defaults filled in) or ``SpecInvalid``."""
        if self.task not in TASKS:
            raise SpecInvalid(f"unknown task {self.task!r}")
        schema = SCHEMAS[self.task].get(self.algorithm)
        if schema is None:
            raise SpecInvalid(f"algorithm {self.algorithm!r} is not available for {self.task}")
        unknown = set(self.params) - set(schema)
        if unknown:
            raise SpecInvalid(f"{self.algorithm}: unknown hyperparameter(s) {sorted(unknown)}")
        out = {}
        for name, p in schema.items():
            out[name] = _check_value(name, p, self.params.get(name, p.default))
        return out

    def to_dict(self) -> dict:
        return {"algorithm": self.algorithm, "task": self.task, "params": dict(self.params), "seed": self.seed}

    @classmethod
    def from_dict(cls, d: dict) -> "ModelSpec":
        return cls(d["algorithm"], d["task"], dict(d.get("params", {})), int(d.get("seed", 0)))


def check_X(X, n_features: int | None = None) -> np.ndarray:
    X = np.asarray(getattr(X, "values", X), dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D matrix, got {X.ndim} dimensions")
    if n_features is not None and X.shape[1] != n_features:
        raise DimensionMismatch(f"model was trained on {n_features} columns, got {X.shape[1]}")
    if not np.all(np.isfinite(X)):
        raise NonFinite("input contains NaN or infinite values")
    return X


class Model:
    """Base of every fitted model. Fitted models are treated as immutable."""

    algorithm = ""
    task = ""

    def __init__(self, params: dict, seed: int = 0):
        self.params = params
        self.seed = seed
        self.n_features = 0
        self.classes = None

    # subclasses implement _fit, _predict / _proba, _state, _load
    def fit(self, X, y):
        raise NotImplementedError

    def predict(self, X) -> np.ndarray:
        X = check_X(X, self.n_features)
        if self.task == "classification":
            return self.classes[np.argmax(self._proba(X), axis=1)]
        return self._predict(X)

    def predict_proba(self, X) -> np.ndarray:
        if self.task != "classification":
            raise TypeError("predict_proba is only defined for classifiers")
        return self._proba(check_X(X, self.n_features))

    @property
    def feature_importances(self) -> np.ndarray | None:
        """Raw per-encoded-column importance weights, None if undefined."""
        return None

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "task": self.task,
            "params": self.params,
            "seed": self.seed,
            "n_features": self.n_features,
            "classes": None if self.classes is None else self.classes.tolist(),
            "state": self._state(),
        }

    def _init_classes(self, y):
        self.classes, codes = np.unique(y, return_inverse=True)
        return codes.astype(np.int64)
