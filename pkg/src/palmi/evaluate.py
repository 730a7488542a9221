"""Data splitting, cross-validation plans, metrics and one-way ANOVA."""
from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import (
    BadProba,
    ClassTooSmall,
    DegenerateGroups,
    FoldError,
    LengthMismatch,
    PalmiError,
    TooSmall,
    ZeroVariance,
)

N_CLASSES = 4
SIGNIFICANCE = 0.001


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def _allocate(total: int, weights: np.ndarray) -> np.ndarray:
    """Integer shares of ``total`` proportional to ``weights`` (largest
    remainder, ties to the earlier entry)."""
    exact = total * weights / weights.sum()
    base = np.floor(exact).astype(int)
    rest = total - base.sum()
    order = np.argsort(-(exact - base), kind="stable")
    base[order[:rest]] += 1
    return base


def train_test_split(n_rows: int, test_fraction: float = 0.2, stratify=None, seed: int = 0):
    """Shuffled ``(train_idx, test_idx)``; the test part has
    ``round(test_fraction * n_rows)`` rows (halves round up)."""
    if n_rows < 5:
        raise TooSmall(f"need at least 5 rows to split, got {n_rows}")
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must lie in (0, 1)")
    n_test = _round_half_up(test_fraction * n_rows)
    rng = np.random.default_rng(seed)
    if stratify is None:
        perm = rng.permutation(n_rows)
        return np.sort(perm[n_test:]), np.sort(perm[:n_test])
    labels = np.asarray(stratify)
    if len(labels) != n_rows:
        raise LengthMismatch(f"{len(labels)} labels for {n_rows} rows")
    classes, counts = np.unique(labels, return_counts=True)
    take = _allocate(n_test, counts.astype(float))
    test = []
    for c, k in zip(classes, take):
        members = np.flatnonzero(labels == c)
        test.append(rng.permutation(members)[:k])
    test = np.sort(np.concatenate(test))
    train = np.setdiff1d(np.arange(n_rows), test)
    return train, test


@dataclass(frozen=True)
class FoldPlan:
    folds: tuple  # of (train_idx, val_idx)
    strategy: str
    k: int
    repeats: int
    seed: int

    def __len__(self):
        return len(self.folds)

    def __iter__(self):
        return iter(self.folds)


STRATEGIES = ("kfold", "stratified_kfold", "repeated_stratified_kfold", "repeated_kfold")


def make_fold_plan(labels_or_n, strategy: str = "repeated_stratified_kfold", k: int = 10, repeats: int = 3, seed: int = 0) -> FoldPlan:
    """Cross-validation folds over ``labels_or_n`` rows.

    Stratified strategies deal each class's shuffled members round-robin
    over the folds (continuing the rotation from class to class), so every
    fold holds floor or ceil of ``n_c / k`` members of class c and fold
    sizes differ by at most one. Each repeat reshuffles with its own stream.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown CV strategy {strategy!r}")
    if k < 2:
        raise ValueError("k must be at least 2")
    stratified = "stratified" in strategy
    if strategy in ("kfold", "stratified_kfold"):
        repeats = 1
    if np.ndim(labels_or_n) == 0:
        if stratified:
            raise ValueError("stratified plans need labels")
        n = int(labels_or_n)
        labels = None
    else:
        labels = np.asarray(labels_or_n)
        n = len(labels)
    if n < k:
        raise TooSmall(f"{n} rows cannot form {k} folds")
    if stratified:
        classes, counts = np.unique(labels, return_counts=True)
        for c, cnt in zip(classes, counts):
            if cnt < k:
                raise ClassTooSmall(c, int(cnt), k)

    folds = []
    for r in range(repeats):
        rng = np.random.default_rng([seed, r])
        assign = np.empty(n, dtype=np.int64)
        if stratified:
            pos = 0
            for c in classes:
                members = rng.permutation(np.flatnonzero(labels == c))
                assign[members] = (pos + np.arange(len(members))) % k
                pos += len(members)
        else:
            perm = rng.permutation(n)
            sizes = np.full(k, n // k)
            sizes[: n % k] += 1
            assign[perm] = np.repeat(np.arange(k), sizes)
        for f in range(k):
            val = np.flatnonzero(assign == f)
            train = np.flatnonzero(assign != f)
            folds.append((train, val))
    return FoldPlan(tuple(folds), strategy, k, repeats, seed)


# ---------------------------------------------------------------- metrics


def confusion_matrix(actual, pred, n_classes: int = N_CLASSES) -> np.ndarray:
    """Rows are actual classes, columns predicted classes."""
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (np.asarray(actual, dtype=np.int64), np.asarray(pred, dtype=np.int64)), 1)
    return cm


def per_class_counts(cm: np.ndarray):
    """One-vs-rest (TP, FP, FN, TN) arrays per class."""
    tp = np.diag(cm).astype(float)
    fp = cm.sum(axis=0) - tp
    fn = cm.sum(axis=1) - tp
    tn = cm.sum() - tp - fp - fn
    return tp, fp, fn, tn


def _div(a, b):
    return np.divide(a, b, out=np.zeros_like(a, dtype=float), where=b != 0)


def roc_curve(scores, positive):
    """(thresholds, fpr, tpr) for one class; the sweep starts at (0, 0) with
    an infinite threshold and visits every distinct score."""
    scores = np.asarray(scores, dtype=float)
    positive = np.asarray(positive, dtype=bool)
    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    pos = positive[order]
    distinct = np.flatnonzero(np.diff(s)) if len(s) > 1 else np.zeros(0, dtype=int)
    ends = np.concatenate([distinct, [len(s) - 1]])
    tps = np.cumsum(pos)[ends]
    fps = (ends + 1) - tps
    P = pos.sum()
    N = len(pos) - P
    tpr = np.concatenate([[0.0], tps / P if P else np.zeros(len(tps))])
    fpr = np.concatenate([[0.0], fps / N if N else np.zeros(len(fps))])
    thr = np.concatenate([[np.inf], s[ends]])
    return thr, fpr, tpr


def auc_ovr(proba, actual, n_classes: int = N_CLASSES):
    """Per-class one-vs-rest trapezoidal AUC (NaN where a class has no
    positives or no negatives) and their mean over defined classes."""
    proba = np.asarray(proba, dtype=float)
    actual = np.asarray(actual)
    per = np.full(n_classes, np.nan)
    for c in range(n_classes):
        pos = actual == c
        if pos.all() or not pos.any():
            continue
        _, fpr, tpr = roc_curve(proba[:, c], pos)
        per[c] = float(np.trapezoid(tpr, fpr))
    defined = per[~np.isnan(per)]
    return per, float(defined.mean()) if defined.size else float("nan")


@dataclass(frozen=True)
class ClassificationReport:
    acc: float
    f1: float
    rec: float
    pre: float
    ji: float
    auc: float
    kappa: float
    mcc: float
    elapsed: float = 0.0
    per_class: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class RegressionReport:
    r2: float
    mae: float
    mse: float
    rmse: float
    max_error: float
    explained_variance: float
    elapsed: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


def cohen_kappa(cm: np.ndarray) -> float:
    n = cm.sum()
    po = np.trace(cm) / n
    pe = float((cm.sum(axis=0) * cm.sum(axis=1)).sum()) / n**2
    if pe == 1.0:
        return 1.0 if po == 1.0 else 0.0
    return float((po - pe) / (1 - pe))


def matthews(cm: np.ndarray) -> float:
    """Multiclass Matthews correlation (Gorodkin's R_K)."""
    cm = cm.astype(float)
    n = cm.sum()
    c = np.trace(cm)
    t = cm.sum(axis=1)
    p = cm.sum(axis=0)
    num = c * n - t @ p
    # one square root of the product keeps perfect predictions at exactly 1
    den = math.sqrt((n**2 - p @ p) * (n**2 - t @ t))
    return float(min(1.0, max(-1.0, num / den))) if den else 0.0


def classification_metrics(pred, actual, proba=None, n_classes: int = N_CLASSES):
    """Macro-averaged report plus the confusion matrix.

    Classes absent from both ``pred`` and ``actual`` are left out of the macro
    means. Undefined ratios (zero denominators) count as 0.
    """
    pred = np.asarray(pred, dtype=np.int64)
    actual = np.asarray(actual, dtype=np.int64)
    if len(pred) != len(actual):
        raise LengthMismatch(f"{len(pred)} predictions for {len(actual)} labels")
    if len(actual) == 0:
        raise LengthMismatch("no rows to evaluate")
    cm = confusion_matrix(actual, pred, n_classes)
    tp, fp, fn, _ = per_class_counts(cm)
    present = (cm.sum(axis=0) + cm.sum(axis=1)) > 0
    rec = _div(tp, tp + fn)
    pre = _div(tp, tp + fp)
    f1 = _div(2 * tp, 2 * tp + fp + fn)
    ji = _div(tp, tp + fp + fn)
    auc = float("nan")
    auc_per = np.full(n_classes, np.nan)
    if proba is not None:
        proba = np.asarray(proba, dtype=float)
        if proba.shape != (len(actual), n_classes):
            raise BadProba(f"probabilities have shape {proba.shape}, expected {(len(actual), n_classes)}")
        if np.any(proba < -1e-12) or not np.allclose(proba.sum(axis=1), 1.0, atol=1e-9):
            raise BadProba("probability rows must be non-negative and sum to 1")
        auc_per, auc = auc_ovr(proba, actual, n_classes)
    report = ClassificationReport(
        acc=float(np.trace(cm) / cm.sum()),
        f1=float(f1[present].mean()),
        rec=float(rec[present].mean()),
        pre=float(pre[present].mean()),
        ji=float(ji[present].mean()),
        auc=auc,
        kappa=cohen_kappa(cm),
        mcc=matthews(cm),
        per_class={
            "rec": rec.tolist(),
            "pre": pre.tolist(),
            "f1": f1.tolist(),
            "ji": ji.tolist(),
            "auc": [None if math.isnan(a) else float(a) for a in auc_per],
        },
    )
    return report, cm


def regression_metrics(pred, actual) -> RegressionReport:
    pred = np.asarray(pred, dtype=float)
    actual = np.asarray(actual, dtype=float)
    if len(pred) != len(actual):
        raise LengthMismatch(f"{len(pred)} predictions for {len(actual)} targets")
    if len(actual) < 2:
        raise LengthMismatch("need at least 2 rows")
    resid = actual - pred
    ss_tot = float(((actual - actual.mean()) ** 2).sum())
    if ss_tot == 0.0:
        raise ZeroVariance("actual values have zero variance; R2 is undefined")
    mse = float(np.mean(resid**2))
    return RegressionReport(
        r2=1.0 - float((resid**2).sum()) / ss_tot,
        mae=float(np.mean(np.abs(resid))),
        mse=mse,
        rmse=math.sqrt(mse),
        max_error=float(np.max(np.abs(resid))),
        explained_variance=1.0 - float(np.var(resid)) / (ss_tot / len(actual)),
    )


# ------------------------------------------------------- cross-validation


def full_proba(model, X, n_classes: int = N_CLASSES) -> np.ndarray:
    """Probabilities over all ordinal classes, zero for classes the model
    never saw."""
    p = model.predict_proba(X)
    out = np.zeros((len(p), n_classes))
    out[:, np.asarray(model.classes, dtype=np.int64)] = p
    return out


def evaluate_model(model, X, y, task: str):
    if task == "classification":
        proba = full_proba(model, X)
        pred = np.argmax(proba, axis=1)
        report, _ = classification_metrics(pred, y, proba)
        return report
    return regression_metrics(model.predict(X), y)


@dataclass
class CVResult:
    task: str
    validation: list
    train: list
    elapsed: list

    def mean(self, metric: str, part: str = "validation") -> float:
        return float(np.mean([getattr(r, metric) for r in getattr(self, part)]))

    def std(self, metric: str, part: str = "validation") -> float:
        return float(np.std([getattr(r, metric) for r in getattr(self, part)]))

    def scores(self, metric: str, part: str = "validation") -> np.ndarray:
        return np.array([getattr(r, metric) for r in getattr(self, part)])

    def aggregate(self) -> dict:
        metrics = ("acc", "f1", "rec", "pre", "ji", "auc", "kappa", "mcc") if self.task == "classification" else (
            "r2", "mae", "mse", "rmse", "max_error", "explained_variance")
        out = {}
        for part in ("train", "validation"):
            out[part] = {m: {"mean": self.mean(m, part), "std": self.std(m, part)} for m in metrics}
        out["folds"] = len(self.validation)
        return out


def cross_validate(spec, X, y, plan: FoldPlan, with_train: bool = True) -> CVResult:
    """Train one independent model per fold of ``plan``."""
    from .models import train

    X = np.asarray(getattr(X, "values", X), dtype=float)
    y = np.asarray(y)
    val_reports, train_reports, elapsed = [], [], []
    for i, (tr, va) in enumerate(plan.folds):
        start = time.perf_counter()
        try:
            model = train(spec, X[tr], y[tr])
            val = evaluate_model(model, X[va], y[va], spec.task)
        except PalmiError as exc:
            raise FoldError(i, exc) from exc
        elapsed.append(time.perf_counter() - start)
        val_reports.append(val)
        if with_train:
            train_reports.append(evaluate_model(model, X[tr], y[tr], spec.task))
    return CVResult(spec.task, val_reports, train_reports, elapsed)


# ------------------------------------------------------------------ ANOVA


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction of the incomplete beta function (modified Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    d = tiny if abs(d) < tiny else d
    d = 1.0 / d
    h = d
    for m in range(1, 10000):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-15:
            break
    return h


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if x == 0.0 or x == 1.0:
        return x
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def f_survival(f: float, d1: float, d2: float) -> float:
    """P(F > f) for the F(d1, d2) distribution."""
    if f <= 0.0:
        return 1.0
    return betainc(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f))


def anova_one_way(groups) -> tuple[float, float]:
    """One-way ANOVA F statistic and p-value."""
    groups = [np.asarray(g, dtype=float) for g in groups]
    if len(groups) < 2 or any(len(g) < 2 for g in groups):
        raise ValueError("need at least 2 groups of at least 2 values")
    n = sum(len(g) for g in groups)
    k = len(groups)
    grand = np.concatenate(groups).mean()
    ss_between = sum(len(g) * (g.mean() - grand) ** 2 for g in groups)
    ss_within = sum(float(((g - g.mean()) ** 2).sum()) for g in groups)
    if ss_within == 0.0:
        raise DegenerateGroups("all groups have zero within-group variance")
    d1, d2 = k - 1, n - k
    F = (ss_between / d1) / (ss_within / d2)
    return float(F), f_survival(F, d1, d2)
