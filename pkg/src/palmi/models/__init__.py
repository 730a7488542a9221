"""Uniform train / predict interface over the model zoo."""
from __future__ import annotations

import logging

import numpy as np

from ..errors import ArtifactError, NonFinite, SingleClass, SpecInvalid, VersionMismatch
from .base import CLASSIFIERS, REGRESSORS, SCHEMAS, Model, ModelSpec, check_X
from .ensemble import AdaBoostModel, DecisionTreeModel, ForestModel, GradientBoostingModel
from .linear import LinearRegressionModel, LogisticRegressionModel
from .neighbors import BernoulliNBModel, GaussianNBModel, KNNModel

__all__ = [
    "CLASSIFIERS",
    "REGRESSORS",
    "SCHEMAS",
    "Model",
    "ModelSpec",
    "feature_importance",
    "model_from_dict",
    "model_to_dict",
    "predict_class",
    "predict_proba",
    "predict_value",
    "train",
    "train_classifier",
    "train_regressor",
]

log = logging.getLogger(__name__)

MODEL_VERSION = 1


def _make(algorithm: str, task: str, params: dict, seed: int) -> Model:
    if algorithm == "dt":
        return DecisionTreeModel(params, seed, task)
    if algorithm in ("rf", "extra_trees", "bagging"):
        return ForestModel(params, seed, task, algorithm)
    if algorithm == "adaboost":
        return AdaBoostModel(params, seed, task)
    if algorithm == "gboost":
        return GradientBoostingModel(params, seed, task)
    if algorithm == "knn":
        return KNNModel(params, seed, task)
    if algorithm == "gnb":
        return GaussianNBModel(params, seed)
    if algorithm == "bnb":
        return BernoulliNBModel(params, seed)
    if algorithm == "logreg":
        return LogisticRegressionModel(params, seed)
    if algorithm in ("ols", "ridge", "lasso", "enet"):
        return LinearRegressionModel(params, seed, algorithm)
    raise SpecInvalid(f"unknown algorithm {algorithm!r}")


def train_classifier(spec: ModelSpec, X, y) -> Model:
    if spec.task != "classification":
        raise SpecInvalid(f"spec is for {spec.task}, not classification")
    params = spec.validated()
    X = check_X(X)
    y = np.asarray(y)
    if len(X) == 0:
        raise SpecInvalid("cannot train on an empty matrix")
    if len(y) != len(X):
        raise SpecInvalid(f"{len(X)} rows but {len(y)} labels")
    if len(np.unique(y)) < 2:
        raise SingleClass("training labels contain a single class")
    if spec.algorithm == "rf" and "learning_rate" in spec.params:
        log.warning("random forest ignores learning_rate=%s", spec.params["learning_rate"])
    return _make(spec.algorithm, "classification", params, spec.seed).fit(X, y)


def train_regressor(spec: ModelSpec, X, y) -> Model:
    if spec.task != "regression":
        raise SpecInvalid(f"spec is for {spec.task}, not regression")
    params = spec.validated()
    X = check_X(X)
    y = np.asarray(y, dtype=float)
    if len(X) == 0:
        raise SpecInvalid("cannot train on an empty matrix")
    if len(y) != len(X):
        raise SpecInvalid(f"{len(X)} rows but {len(y)} targets")
    if not np.all(np.isfinite(y)):
        raise NonFinite("target contains NaN or infinite values")
    if spec.algorithm == "rf" and "learning_rate" in spec.params:
        log.warning("random forest ignores learning_rate=%s", spec.params["learning_rate"])
    return _make(spec.algorithm, "regression", params, spec.seed).fit(X, y)


def train(spec: ModelSpec, X, y) -> Model:
    if spec.task == "classification":
        return train_classifier(spec, X, y)
    return train_regressor(spec, X, y)


def predict_class(model: Model, X) -> np.ndarray:
    """Class labels; the argmax of ``predict_proba`` with ties going to the
    lower class."""
    return model.predict(X)


def predict_proba(model: Model, X) -> np.ndarray:
    return model.predict_proba(X)


def predict_value(model: Model, X) -> np.ndarray:
    return model.predict(X)


def feature_importance(model: Model, columns) -> dict[str, float] | None:
    """Importance per source predictor, summing one-hot groups, normalized to
    sum to 1.

    ``columns`` is the matrix column metadata (anything with a ``source``
    attribute per column). Returns None for models without a defined
    importance (k-NN and naive Bayes).
    """
    raw = model.feature_importances
    if raw is None:
        return None
    if len(columns) != len(raw):
        raise ValueError(f"{len(columns)} column descriptions for {len(raw)} model columns")
    scores: dict[str, float] = {}
    for col, value in zip(columns, raw):
        scores[col.source] = scores.get(col.source, 0.0) + float(value)
    total = sum(scores.values())
    if total <= 0:
        log.warning("model has no nonzero importance; reporting equal shares")
        return {k: 1.0 / len(scores) for k in scores}
    return {k: v / total for k, v in scores.items()}


def model_to_dict(model: Model) -> dict:
    return {"version": MODEL_VERSION, **model.to_dict()}


def model_from_dict(d: dict) -> Model:
    if d.get("version") != MODEL_VERSION:
        raise VersionMismatch(f"model artifact version {d.get('version')!r}, expected {MODEL_VERSION}")
    try:
        model = _make(d["algorithm"], d["task"], d["params"], d["seed"])
        model.n_features = int(d["n_features"])
        if d["classes"] is not None:
            model.classes = np.array(d["classes"])
        model._load(d["state"])
    except KeyError as exc:
        raise ArtifactError(f"model artifact lacks field {exc}") from None
    return model
