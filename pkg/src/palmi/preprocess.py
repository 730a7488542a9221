"""Scaling of numeric predictors, one-hot encoding of nominal predictors and
assembly of the dense design matrix."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dataset import SCHEMA, PredictorSchema, RawRecord, label_records, normalize_token
from .errors import VersionMismatch

METHODS = ("zscore", "minmax", "maxabs", "robust")


class UnknownCategoryWarning(UserWarning):
    pass


def quantile7(values, q: float) -> float:
    """Quantile by linear interpolation between order statistics (type 7)."""
    x = np.sort(np.asarray(values, dtype=float))
    if x.size == 0:
        raise ValueError("quantile of an empty vector")
    h = (x.size - 1) * q
    lo = int(np.floor(h))
    hi = min(lo + 1, x.size - 1)
    return float(x[lo] + (h - lo) * (x[hi] - x[lo]))


@dataclass(frozen=True)
class Normalizer:
    """Fitted affine scaling ``(x - center) / scale`` for one column.

    ``params`` keeps the method-specific statistics (mean/std, min/max,
    maxabs, median/iqr). A degenerate (constant) column has ``scale == 0``
    and maps every value to 0.
    """

    method: str
    center: float
    scale: float
    params: dict = field(default_factory=dict)

    @property
    def degenerate(self) -> bool:
        return self.scale == 0.0

    def apply(self, values) -> np.ndarray:
        return apply_normalizer(self, values)

    def inverse(self, values) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        if self.degenerate:
            return np.full_like(values, self.center)
        return values * self.scale + self.center

    def to_dict(self) -> dict:
        return {"method": self.method, "center": self.center, "scale": self.scale, "params": dict(self.params)}

    @classmethod
    def from_dict(cls, d: dict) -> "Normalizer":
        return cls(d["method"], float(d["center"]), float(d["scale"]), dict(d["params"]))


def fit_normalizer(column, method: str = "zscore") -> Normalizer:
    x = np.asarray(column, dtype=float)
    if x.size == 0:
        raise ValueError("cannot fit a normalizer on an empty column")
    if method == "zscore":
        mean = float(x.mean())
        std = float(np.sqrt(np.mean((x - mean) ** 2)))
        return Normalizer(method, mean, std, {"mean": mean, "std": std})
    if method == "minmax":
        lo, hi = float(x.min()), float(x.max())
        return Normalizer(method, lo, hi - lo, {"min": lo, "max": hi})
    if method == "maxabs":
        m = float(np.abs(x).max())
        # a constant column is degenerate under every method
        scale = m if x.max() > x.min() else 0.0
        return Normalizer(method, 0.0, scale, {"maxabs": m})
    if method == "robust":
        med = quantile7(x, 0.5)
        iqr = quantile7(x, 0.75) - quantile7(x, 0.25)
        return Normalizer(method, med, iqr, {"median": med, "iqr": iqr})
    raise ValueError(f"unknown normalization method {method!r}; expected one of {METHODS}")


def apply_normalizer(norm: Normalizer, values) -> np.ndarray:
    # out-of-range values are deliberately not clipped
    x = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite value passed to normalizer")
    if norm.degenerate:
        return np.zeros_like(x)
    return (x - norm.center) / norm.scale


@dataclass(frozen=True)
class OneHotEncoder:
    vocabulary: tuple[str, ...]
    name: str = ""

    def index(self, token: str) -> int | None:
        try:
            return self.vocabulary.index(normalize_token(token))
        except ValueError:
            return None


def fit_one_hot(tokens: Sequence[str], name: str = "") -> OneHotEncoder:
    if len(tokens) == 0:
        raise ValueError("cannot fit an encoder on an empty column")
    vocab = dict.fromkeys(normalize_token(t) for t in tokens)
    return OneHotEncoder(tuple(vocab), name)


def apply_one_hot(encoder: OneHotEncoder, token: str) -> np.ndarray:
    """Indicator vector of ``token``; unknown tokens give all zeros and warn."""
    out = np.zeros(len(encoder.vocabulary))
    i = encoder.index(token)
    if i is None:
        warnings.warn(
            f"unknown category {token!r} for {encoder.name or 'nominal predictor'}; encoded as all zeros",
            UnknownCategoryWarning,
            stacklevel=2,
        )
    else:
        out[i] = 1.0
    return out


@dataclass(frozen=True)
class ColumnInfo:
    source: str
    kind: str  # "numeric" or "onehot"
    category: str | None = None

    @property
    def label(self) -> str:
        return self.source if self.category is None else f"{self.source}={self.category}"


@dataclass(frozen=True)
class FeatureMatrix:
    values: np.ndarray
    columns: tuple[ColumnInfo, ...]
    target: np.ndarray | None = None
    target_kind: str | None = None

    @property
    def shape(self):
        return self.values.shape

    def __len__(self):
        return self.values.shape[0]

    def rows(self, index) -> "FeatureMatrix":
        index = np.asarray(index, dtype=np.int64)
        target = None if self.target is None else self.target[index]
        return FeatureMatrix(self.values[index], self.columns, target, self.target_kind)

    def with_rows(self, values, target) -> "FeatureMatrix":
        return FeatureMatrix(np.asarray(values, dtype=float), self.columns, np.asarray(target), self.target_kind)

    def groups(self) -> dict[str, list[int]]:
        """Encoded column indices of every source predictor, in layout order."""
        out: dict[str, list[int]] = {}
        for j, col in enumerate(self.columns):
            out.setdefault(col.source, []).append(j)
        return out


TARGET_KINDS = ("ordinal_class", "numeric")


def assemble_matrix(
    records: Sequence[RawRecord],
    normalizers: dict[str, Normalizer],
    encoders: dict[str, OneHotEncoder],
    target_kind: str | None = "ordinal_class",
    schema: PredictorSchema = SCHEMA,
) -> FeatureMatrix:
    """Normalized numeric columns (schema order) followed by one-hot blocks."""
    missing = [p.field for p in schema.numeric if p.field not in normalizers]
    missing += [p.field for p in schema.nominal if p.field not in encoders]
    if missing:
        raise ValueError(f"no fitted transformer for: {', '.join(missing)}")

    columns = [ColumnInfo(p.field, "numeric") for p in schema.numeric]
    for p in schema.nominal:
        columns += [ColumnInfo(p.field, "onehot", tok) for tok in encoders[p.field].vocabulary]

    blocks = []
    for p in schema.numeric:
        raw = np.array([getattr(r, p.field) for r in records], dtype=float)
        blocks.append(apply_normalizer(normalizers[p.field], raw).reshape(-1, 1))
    for p in schema.nominal:
        enc = encoders[p.field]
        block = np.zeros((len(records), len(enc.vocabulary)))
        for i, r in enumerate(records):
            block[i] = apply_one_hot(enc, getattr(r, p.field))
        blocks.append(block)
    values = np.hstack(blocks) if records else np.zeros((0, len(columns)))

    target = None
    if target_kind == "ordinal_class":
        target = label_records(records)
    elif target_kind == "numeric":
        target = np.array([r.mi_log_reduction for r in records], dtype=float)
    elif target_kind is not None:
        raise ValueError(f"unknown target kind {target_kind!r}")
    return FeatureMatrix(values, tuple(columns), target, target_kind)


PIPELINE_VERSION = 1


@dataclass(frozen=True)
class Preprocessor:
    """Fitted normalizers and encoders covering all twelve predictors."""

    method: str
    normalizers: dict
    encoders: dict

    @classmethod
    def fit(cls, records: Sequence[RawRecord], method: str = "zscore", schema: PredictorSchema = SCHEMA):
        if not records:
            raise ValueError("cannot fit a preprocessor on zero records")
        norms = {
            p.field: fit_normalizer([getattr(r, p.field) for r in records], method) for p in schema.numeric
        }
        encs = {p.field: fit_one_hot([getattr(r, p.field) for r in records], p.field) for p in schema.nominal}
        return cls(method, norms, encs)

    def transform(self, records: Sequence[RawRecord], target_kind: str | None = "ordinal_class") -> FeatureMatrix:
        return assemble_matrix(records, self.normalizers, self.encoders, target_kind)

    def to_dict(self) -> dict:
        return {
            "version": PIPELINE_VERSION,
            "method": self.method,
            "normalizers": {k: v.to_dict() for k, v in self.normalizers.items()},
            "encoders": {k: list(v.vocabulary) for k, v in self.encoders.items()},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Preprocessor":
        if d.get("version") != PIPELINE_VERSION:
            raise VersionMismatch(f"unsupported preprocessor version {d.get('version')!r}")
        return cls(
            d["method"],
            {k: Normalizer.from_dict(v) for k, v in d["normalizers"].items()},
            {k: OneHotEncoder(tuple(v), k) for k, v in d["encoders"].items()},
        )
