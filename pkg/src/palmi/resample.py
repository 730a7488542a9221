"""Oversampling of the training partition.

``smote_balance`` equalizes class counts of the ordinal target by
interpolating between same-class nearest neighbours. ``smogn_resample``
oversamples rare target values of the continuous target, choosing per
synthetic point between interpolation (features and target) and Gaussian
noise, depending on how close the chosen neighbour is.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ResampleError, TooFewSamples
from .preprocess import quantile7

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SmoteConfig:
    k_neighbors: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.k_neighbors < 1:
            raise ValueError("k_neighbors must be >= 1")


@dataclass(frozen=True)
class SmognConfig:
    k_neighbors: int = 5
    relevance_threshold: float = 0.8
    noise_fraction: float = 0.05
    safe_distance_quantile: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.k_neighbors < 1:
            raise ValueError("k_neighbors must be >= 1")
        for name in ("noise_fraction", "safe_distance_quantile"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")
        # thresholds >= 1 are accepted: nothing can exceed them, which
        # disables oversampling
        if not self.relevance_threshold > 0.0:
            raise ValueError("relevance_threshold must be positive")


@dataclass(frozen=True)
class Resampled:
    """Resampled data. Original rows come first, synthetic rows after.

    ``parents[i]`` holds the two source-row indices of synthetic row i
    (equal indices for noise-generated rows) and ``noise[i]`` marks rows
    made by the Gaussian branch.
    """

    X: np.ndarray
    y: np.ndarray
    parents: np.ndarray
    noise: np.ndarray

    def __iter__(self):
        # allows ``X, y = smote_balance(...)``
        return iter((self.X, self.y))

    @property
    def n_synthetic(self) -> int:
        return len(self.parents)


def _pairwise(A: np.ndarray) -> np.ndarray:
    d = ((A[:, None, :] - A[None, :, :]) ** 2).sum(axis=2)
    return np.sqrt(d)


def _neighbors(D: np.ndarray, k: int) -> np.ndarray:
    """k nearest other rows by distance, ties to the lower index."""
    n = D.shape[0]
    out = np.empty((n, k), dtype=np.int64)
    for i in range(n):
        d = D[i].copy()
        d[i] = np.inf
        order = np.argsort(d, kind="stable")
        out[i] = order[:k]
    return out


def smote_balance(X, y, cfg: SmoteConfig = SmoteConfig()) -> Resampled:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    labels, counts = np.unique(y, return_counts=True)
    if len(labels) < 2:
        raise ResampleError("SMOTE needs at least two classes")
    target = int(counts.max())
    new_X, new_y, parents = [X], [y], []
    for ci, (label, count) in enumerate(zip(labels, counts)):
        need = target - int(count)
        if need == 0:
            continue
        if count < 2:
            raise TooFewSamples(label, int(count))
        members = np.flatnonzero(y == label)
        k = cfg.k_neighbors
        if k >= count:
            k = int(count) - 1
            warnings.warn(f"class {label}: k_neighbors reduced to {k}", RuntimeWarning, stacklevel=2)
        nn = _neighbors(_pairwise(X[members]), k)
        rng = np.random.default_rng([cfg.seed, ci])
        base = rng.integers(0, count, size=need)
        pick = rng.integers(0, k, size=need)
        u = rng.random(need)
        a = members[base]
        b = members[nn[base, pick]]
        new_X.append(X[a] + u[:, None] * (X[b] - X[a]))
        new_y.append(np.full(need, label, dtype=y.dtype))
        parents.append(np.column_stack([a, b]))
    par = np.vstack(parents) if parents else np.zeros((0, 2), dtype=np.int64)
    return Resampled(np.vstack(new_X), np.concatenate(new_y), par, np.zeros(len(par), dtype=bool))


def relevance(y) -> np.ndarray:
    """Rarity score in [0, 1]: 0 at the median, rising linearly to 1 at
    median +/- 1.5 IQR and staying at 1 beyond."""
    y = np.asarray(y, dtype=float)
    if y.size == 0:
        raise ValueError("relevance of an empty vector")
    med = quantile7(y, 0.5)
    iqr = quantile7(y, 0.75) - quantile7(y, 0.25)
    if iqr == 0.0:
        return np.zeros_like(y)
    return np.minimum(1.0, np.abs(y - med) / (1.5 * iqr))


def smogn_resample(X, y, cfg: SmognConfig = SmognConfig()) -> Resampled:
    """Oversample rows whose target relevance reaches the threshold.

    Rare rows are grouped into the low and the high tail (relative to the
    median) and neighbours are searched within the same tail, so
    interpolation never bridges the two extremes. Enough synthetic rows are
    generated to bring the rare count up to the normal count, spread evenly
    over rare rows.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(y)
    if n < cfg.k_neighbors + 1:
        raise ResampleError(f"SMOGN needs at least {cfg.k_neighbors + 1} rows, got {n}")
    rel = relevance(y)
    rare = np.flatnonzero(rel >= cfg.relevance_threshold)
    if rare.size == 0:
        warnings.warn("no rare targets above the relevance threshold; data left unchanged", RuntimeWarning, stacklevel=2)
        return Resampled(X.copy(), y.copy(), np.zeros((0, 2), dtype=np.int64), np.zeros(0, dtype=bool))

    n_syn = max(n - 2 * rare.size, 0)
    if n_syn == 0:
        return Resampled(X.copy(), y.copy(), np.zeros((0, 2), dtype=np.int64), np.zeros(0, dtype=bool))
    per_row = np.full(rare.size, n_syn // rare.size)
    per_row[: n_syn % rare.size] += 1

    x_sd = X.std(axis=0) * cfg.noise_fraction
    y_sd = y.std() * cfg.noise_fraction
    med = quantile7(y, 0.5)

    tails = {}
    for name, members in (("low", rare[y[rare] < med]), ("high", rare[y[rare] >= med])):
        if members.size == 0:
            continue
        k = min(cfg.k_neighbors, members.size - 1)
        D = _pairwise(X[members])
        nn = _neighbors(D, k) if k > 0 else np.zeros((members.size, 0), dtype=np.int64)
        tails[name] = (members, D, nn)

    out_X, out_y, parents, noise = [], [], [], []
    for r, row in enumerate(rare):
        reps = int(per_row[r])
        if reps == 0:
            continue
        members, D, nn = tails["low" if y[row] < med else "high"]
        local = int(np.flatnonzero(members == row)[0])
        rng = np.random.default_rng([cfg.seed, int(row)])
        k = nn.shape[1]
        safe = quantile7(D[local, nn[local]], cfg.safe_distance_quantile) if k else 0.0
        for _ in range(reps):
            if k:
                j = int(nn[local, rng.integers(0, k)])
                other = int(members[j])
                interpolate = D[local, j] <= safe
            else:
                other, interpolate = int(row), False
            if interpolate:
                u = rng.random()
                out_X.append(X[row] + u * (X[other] - X[row]))
                out_y.append(y[row] + u * (y[other] - y[row]))
                parents.append((row, other))
                noise.append(False)
            else:
                out_X.append(X[row] + rng.normal(0.0, 1.0, X.shape[1]) * x_sd)
                out_y.append(y[row] + rng.normal(0.0, 1.0) * y_sd)
                parents.append((row, row))
                noise.append(True)
    log.debug("SMOGN: %d rare rows, %d synthetic rows", rare.size, len(out_y))
    return Resampled(
        np.vstack([X, np.array(out_X)]),
        np.concatenate([y, np.array(out_y)]),
        np.array(parents, dtype=np.int64),
        np.array(noise, dtype=bool),
    )


def ks_to_uniform(values, lo: float, hi: float) -> float:
    """Kolmogorov-Smirnov distance between the empirical CDF of ``values``
    and the uniform CDF on [lo, hi]."""
    x = np.sort(np.asarray(values, dtype=float))
    n = x.size
    F = np.clip((x - lo) / (hi - lo), 0.0, 1.0)
    upper = np.arange(1, n + 1) / n - F
    lower = F - np.arange(0, n) / n
    return float(max(upper.max(), lower.max()))
