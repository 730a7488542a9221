"""Command-line front end: synth, summarize, run, tune and predict.

Settings come from a flat ``key = value`` config file (a TOML subset) and
are overridden by command-line flags. Every random draw derives from the
configured seed, so all outputs are deterministic functions of the config
and the input bytes. Wall-clock timings go to ``timings.json`` only.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
import time
import warnings
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .dataset import (
    MI_CLASS_NAMES,
    SCHEMA,
    class_counts,
    correlation_matrix,
    label_records,
    read_dataset,
    summarize,
    write_dataset,
)
from .errors import ConfigError, MissingColumn, PalmiError, SchemaMismatch, VersionMismatch
from .evaluate import (
    STRATEGIES,
    classification_metrics,
    cross_validate,
    full_proba,
    make_fold_plan,
    regression_metrics,
    roc_curve,
    train_test_split,
)
from .models import (
    SCHEMAS,
    ModelSpec,
    feature_importance,
    model_from_dict,
    model_to_dict,
    train,
)
from .preprocess import METHODS, Preprocessor, UnknownCategoryWarning
from .resample import SmognConfig, SmoteConfig, smogn_resample, smote_balance
from .synth import generate_surrogate
from .tune import Fitness, GaConfig, SearchSpace, default_rf_space, evolve, parse_domain

log = logging.getLogger("palmi")

ARTIFACT_VERSION = 1
TASKS = ("classification", "regression")


class StageError(Exception):
    """An error tagged with the pipeline stage that raised it."""

    def __init__(self, stage: str, message: str, exit_code: int = 1):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
        self.exit_code = exit_code


class _Stage:
    """Context manager that re-raises library errors tagged with a stage."""

    def __init__(self, name: str):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is None or isinstance(exc, StageError):
            return False
        if isinstance(exc, (PalmiError, ValueError, OSError, KeyError)):
            if isinstance(exc, FileNotFoundError):
                msg = f"no such file: {exc.filename}"
            elif isinstance(exc, OSError) and exc.filename:
                msg = f"cannot access {exc.filename}: {exc.strerror}"
            else:
                msg = str(exc)
            raise StageError(self.name, msg) from exc
        return False


# ------------------------------------------------------------------ config


@dataclass
class RunConfig:
    input: str | None = None
    out: str = "out"
    task: str = "classification"
    normalizer: str = "zscore"
    model: str = "rf"
    model_params: dict = field(default_factory=dict)
    seed: int = 0
    test_fraction: float = 0.2
    cv_strategy: str | None = None  # task default when None
    cv_k: int = 10
    cv_repeats: int = 3
    resample: bool = True
    smote_k: int = 5
    smogn_k: int = 5
    smogn_threshold: float = 0.8
    smogn_noise: float = 0.05
    smogn_safe_quantile: float = 0.5
    fit_on_all: bool = False
    tune: bool = False
    ga_generations: int = 10
    ga_population: int = 20
    ga_offspring: int = 10
    ga_tournament: int = 3
    ga_crossover: float = 0.9
    ga_mutation: float = 0.1
    search: dict = field(default_factory=dict)
    ddof: int = 0

    @property
    def strategy(self) -> str:
        if self.cv_strategy:
            return self.cv_strategy
        return "repeated_stratified_kfold" if self.task == "classification" else "kfold"

    def spec(self) -> ModelSpec:
        return ModelSpec(self.model, self.task, dict(self.model_params), self.seed)

    def ga(self) -> GaConfig:
        return GaConfig(
            generations=self.ga_generations,
            population=self.ga_population,
            offspring=self.ga_offspring,
            tournament=self.ga_tournament,
            crossover=self.ga_crossover,
            mutation=self.ga_mutation,
            seed=self.seed,
        )

    def search_space(self) -> SearchSpace:
        if not self.search:
            if self.model != "rf":
                raise ConfigError("tuning a model other than rf needs search.* domains")
            return default_rf_space(self.task)
        genes = tuple((name, parse_domain(text)) for name, text in self.search.items())
        algorithm = None if "algorithm" in self.search else self.model
        return SearchSpace(self.task, genes, algorithm)

    def validate(self) -> "RunConfig":
        """Check every field before any compute."""
        if self.task not in TASKS:
            raise ConfigError(f"task must be one of {TASKS}, got {self.task!r}")
        if self.normalizer not in METHODS:
            raise ConfigError(f"normalizer must be one of {METHODS}, got {self.normalizer!r}")
        if self.model not in SCHEMAS[self.task]:
            raise ConfigError(f"unknown {self.task} model {self.model!r}; choose from {tuple(SCHEMAS[self.task])}")
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"cv_strategy must be one of {STRATEGIES}")
        if self.task == "regression" and "stratified" in self.strategy:
            raise ConfigError("stratified CV needs class labels; use kfold or repeated_kfold for regression")
        if not 0.0 < self.test_fraction < 1.0:
            raise ConfigError("test_fraction must lie in (0, 1)")
        if self.cv_k < 2 or self.cv_repeats < 1:
            raise ConfigError("cv_k >= 2 and cv_repeats >= 1 required")
        if self.ddof not in (0, 1):
            raise ConfigError("ddof must be 0 or 1")
        try:
            self.spec().validated()
            SmoteConfig(self.smote_k, self.seed)
            SmognConfig(self.smogn_k, self.smogn_threshold, self.smogn_noise, self.smogn_safe_quantile, self.seed)
            self.ga()
            if self.tune:
                self.search_space()
        except (PalmiError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        return self


_SCALAR_KEYS = {f.name: f for f in fields(RunConfig) if f.name not in ("model_params", "search")}


def _parse_value(text: str):
    text = text.strip()
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "\"'":
        return text[1:-1]
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def _strip_comment(line: str) -> str:
    quote = None
    for i, ch in enumerate(line):
        if ch in "\"'":
            quote = None if quote == ch else (quote or ch)
        elif ch == "#" and quote is None:
            return line[:i]
    return line


def parse_config(text: str) -> dict:
    """Parse flat ``key = value`` lines; ``#`` starts a comment.

    Dotted keys ``model.<param>`` and ``search.<param>`` set model
    hyperparameters and tuner search domains. Unknown keys are rejected.
    """
    out: dict = {"model_params": {}, "search": {}}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"config line {lineno}: expected 'key = value'")
        parsed = _parse_value(value)
        if key.startswith("model."):
            out["model_params"][key[6:]] = None if parsed in ("none", "None") else parsed
        elif key.startswith("search."):
            out["search"][key[7:]] = str(parsed)
        elif key in _SCALAR_KEYS:
            out[key] = parsed
        else:
            raise ConfigError(f"config line {lineno}: unknown key {key!r}")
    return out


def _coerce_field(name: str, value):
    kind = _SCALAR_KEYS[name].type
    try:
        if "bool" in kind:
            if not isinstance(value, bool):
                raise TypeError
            return value
        if "int" in kind:
            if isinstance(value, bool) or float(value) != int(value):
                raise TypeError
            return int(value)
        if "float" in kind:
            if isinstance(value, bool):
                raise TypeError
            return float(value)
        return None if value is None else str(value)
    except (TypeError, ValueError):
        raise ConfigError(f"config key {name!r}: invalid value {value!r}") from None


def build_config(args) -> RunConfig:
    values: dict = {"model_params": {}, "search": {}}
    if getattr(args, "config", None):
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise StageError("config", f"cannot read config file {args.config}: {exc.strerror}", 2) from exc
        values = parse_config(text)
    overrides = {
        "input": getattr(args, "input", None),
        "out": getattr(args, "out", None),
        "seed": getattr(args, "seed", None),
        "task": getattr(args, "task", None),
        "normalizer": getattr(args, "normalizer", None),
        "model": getattr(args, "model", None),
        "smote_k": getattr(args, "smote_k", None),
        "smogn_threshold": getattr(args, "smogn_threshold", None),
        "smogn_noise": getattr(args, "smogn_noise", None),
    }
    for key, value in overrides.items():
        if value is not None:
            values[key] = value
    if getattr(args, "fit_on_all", False):
        values["fit_on_all"] = True
    if getattr(args, "tune", False):
        values["tune"] = True
    kwargs = {k: _coerce_field(k, v) for k, v in values.items() if k in _SCALAR_KEYS}
    cfg = RunConfig(**kwargs, model_params=values["model_params"], search=values["search"])
    return cfg.validate()


# ------------------------------------------------------------------ output


def _clean(obj):
    """JSON-safe copy: NaN and infinities become null, arrays become lists."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _num(x) -> str:
    x = float(x)
    if math.isnan(x):
        return ""
    return repr(x)


def _report_dict(report) -> dict:
    d = report.to_dict()
    d.pop("elapsed", None)
    return d


# ------------------------------------------------------------------ pipeline


@dataclass
class Prepared:
    records: list
    preprocessor: Preprocessor
    columns: tuple
    X_train: np.ndarray
    y_train: np.ndarray
    X_test: np.ndarray
    y_test: np.ndarray
    test_rows: np.ndarray  # input-file row index of each test row, -1 for synthetic
    n_train_raw: int
    counts: dict


def _load(cfg: RunConfig) -> list:
    if not cfg.input:
        raise StageError("config", "no input file given (set 'input' or pass --input)", 2)
    with _Stage("load"):
        records = read_dataset(cfg.input)
    if len(records) < 5:
        raise StageError("load", f"{cfg.input} holds {len(records)} record(s); at least 5 are needed")
    return records


def _resample(cfg: RunConfig, X, y):
    with _Stage("resample"):
        if not cfg.resample:
            return X, y
        if cfg.task == "classification":
            res = smote_balance(X, y, SmoteConfig(cfg.smote_k, cfg.seed))
        else:
            res = smogn_resample(
                X, y,
                SmognConfig(cfg.smogn_k, cfg.smogn_threshold, cfg.smogn_noise, cfg.smogn_safe_quantile, cfg.seed),
            )
        return res.X, res.y


def prepare(cfg: RunConfig, records: list) -> Prepared:
    """Label, split, fit transformers, and resample the training part.

    The default fits transformers and resamples on the training split only.
    ``fit_on_all`` uses the reference order instead: normalize, encode and
    resample the whole dataset, then split.
    """
    target_kind = "ordinal_class" if cfg.task == "classification" else "numeric"
    labels = label_records(records)
    counts = class_counts(labels)
    if cfg.fit_on_all:
        with _Stage("preprocess"):
            pre = Preprocessor.fit(records, cfg.normalizer)
            M = pre.transform(records, target_kind)
        X, y = _resample(cfg, M.values, M.target)
        rows = np.concatenate([np.arange(len(records)), np.full(len(X) - len(records), -1)])
        with _Stage("split"):
            strat = y if cfg.task == "classification" else None
            tr, te = train_test_split(len(X), cfg.test_fraction, strat, cfg.seed)
        return Prepared(records, pre, M.columns, X[tr], y[tr], X[te], y[te], rows[te], len(tr), counts)

    with _Stage("split"):
        strat = labels if cfg.task == "classification" else None
        tr, te = train_test_split(len(records), cfg.test_fraction, strat, cfg.seed)
    train_recs = [records[i] for i in tr]
    test_recs = [records[i] for i in te]
    with _Stage("preprocess"):
        pre = Preprocessor.fit(train_recs, cfg.normalizer)
        Mtr = pre.transform(train_recs, target_kind)
        with warnings.catch_warnings():
            # test tokens unseen in training are expected here
            warnings.simplefilter("ignore", UnknownCategoryWarning)
            Mte = pre.transform(test_recs, target_kind)
    X, y = _resample(cfg, Mtr.values, Mtr.target)
    return Prepared(records, pre, Mtr.columns, X, y, Mte.values, Mte.target, te, len(tr), counts)


def _plan(cfg: RunConfig, y, strategy=None, repeats=None):
    strategy = strategy or cfg.strategy
    with _Stage("cv"):
        target = y if "stratified" in strategy else len(y)
        return make_fold_plan(target, strategy, cfg.cv_k, cfg.cv_repeats if repeats is None else repeats, cfg.seed)


def _tune(cfg: RunConfig, prep: Prepared):
    """GA search with a single 10-fold plan as fitness."""
    space = cfg.search_space()
    strategy = "stratified_kfold" if cfg.task == "classification" else "kfold"
    plan = _plan(cfg, prep.y_train, strategy, 1)
    with _Stage("tune"):
        fitness = Fitness(space, prep.X_train, prep.y_train, plan, cfg.seed)
        return evolve(space, cfg.ga(), fitness)


def _history_rows(result):
    return [(g, _num(b), _num(m), _num(s)) for g, b, m, s in result.history]


# ------------------------------------------------------------------ commands


def cmd_synth(args) -> int:
    n = args.n
    if n < 1:
        raise StageError("config", "--n must be positive", 2)
    records = generate_surrogate(n=n, seed=args.seed or 0)
    with _Stage("write"):
        if args.out in (None, "-"):
            write_dataset(records, sys.stdout)
        else:
            with open(args.out, "w", newline="", encoding="utf-8") as fh:
                write_dataset(records, fh)
    return 0


def cmd_summarize(args) -> int:
    cfg = build_config(args)
    records = _load(cfg)
    with _Stage("summarize"):
        stats = summarize(records, ddof=cfg.ddof)
        names, mat = correlation_matrix(records)
        counts = class_counts(label_records(records))
    out = Path(cfg.out)
    with _Stage("write"):
        out.mkdir(parents=True, exist_ok=True)
        _write_json(
            out / "summary.json",
            {
                "n_records": len(records),
                "ddof": cfg.ddof,
                "fields": {k: vars(v) for k, v in stats.items()},
                "class_counts": counts,
            },
        )
        _write_csv(out / "correlation.csv", ["field", *names], [[n, *map(_num, row)] for n, row in zip(names, mat)])
    return 0


def cmd_run(args) -> int:
    cfg = build_config(args)
    timings: dict = {}
    t0 = time.perf_counter()
    records = _load(cfg)
    prep = prepare(cfg, records)
    timings["prepare"] = time.perf_counter() - t0

    spec = cfg.spec()
    history = None
    if cfg.tune:
        t = time.perf_counter()
        result = _tune(cfg, prep)
        spec = result.best_spec
        history = result
        timings["tune"] = time.perf_counter() - t

    t = time.perf_counter()
    plan = _plan(cfg, prep.y_train)
    with _Stage("cv"):
        cv = cross_validate(spec, prep.X_train, prep.y_train, plan)
    timings["cv_folds"] = cv.elapsed
    timings["cv_total"] = time.perf_counter() - t

    t = time.perf_counter()
    with _Stage("fit"):
        model = train(spec, prep.X_train, prep.y_train)
    timings["fit"] = time.perf_counter() - t

    out = Path(cfg.out)
    with _Stage("evaluate"):
        if cfg.task == "classification":
            proba = full_proba(model, prep.X_test)
            pred = np.argmax(proba, axis=1)
            report, cm = classification_metrics(pred, prep.y_test, proba)
        else:
            pred = model.predict(prep.X_test)
            report = regression_metrics(pred, prep.y_test)
        importance = feature_importance(model, prep.columns)
    fold_metric = "acc" if cfg.task == "classification" else "r2"
    metrics = {
        "task": cfg.task,
        "spec": spec.to_dict(),
        "seed": cfg.seed,
        "fit_on_all": cfg.fit_on_all,
        "class_counts": prep.counts,
        "n_records": len(records),
        "n_train": prep.n_train_raw,
        "n_train_resampled": int(len(prep.y_train)),
        "n_test": int(len(prep.y_test)),
        "cv": {
            "strategy": plan.strategy,
            "k": plan.k,
            "repeats": plan.repeats,
            **cv.aggregate(),
            "fold_" + fold_metric: cv.scores(fold_metric).tolist(),
        },
        "test": _report_dict(report),
        "importance": importance,
    }
    if history is not None:
        metrics["tuning"] = {"best_score": history.best_score, "evaluations": history.evaluations}

    with _Stage("write"):
        out.mkdir(parents=True, exist_ok=True)
        if cfg.task == "classification":
            _write_csv(
                out / "confusion.csv",
                ["actual", *MI_CLASS_NAMES],
                [[MI_CLASS_NAMES[i], *map(int, row)] for i, row in enumerate(cm)],
            )
            roc_rows = []
            for c, name in enumerate(MI_CLASS_NAMES):
                positive = prep.y_test == c
                if positive.all() or not positive.any():
                    continue
                thr, fpr, tpr = roc_curve(proba[:, c], positive)
                roc_rows += [[name, "inf" if math.isinf(a) else repr(float(a)), repr(float(b)), repr(float(d))]
                             for a, b, d in zip(thr, fpr, tpr)]
            _write_csv(out / "roc.csv", ["class", "threshold", "fpr", "tpr"], roc_rows)
            pva = [[_row(r), MI_CLASS_NAMES[a], MI_CLASS_NAMES[p]] for r, a, p in zip(prep.test_rows, prep.y_test, pred)]
        else:
            pva = [[_row(r), _num(a), _num(p)] for r, a, p in zip(prep.test_rows, prep.y_test, pred)]
        _write_csv(out / "pred_vs_actual.csv", ["row", "actual", "predicted"], pva)
        if importance is None:
            imp_rows = [[p.field, "NA"] for p in SCHEMA.predictors]
        else:
            imp_rows = [[k, _num(v)] for k, v in sorted(importance.items(), key=lambda kv: (-kv[1], kv[0]))]
        _write_csv(out / "importance.csv", ["predictor", "importance"], imp_rows)
        if history is not None:
            _write_csv(out / "history.csv", ["generation", "best", "mean", "std"], _history_rows(history))
        artifact = {
            "version": ARTIFACT_VERSION,
            "package_version": __version__,
            "task": cfg.task,
            "pipeline": prep.preprocessor.to_dict(),
            "model": model_to_dict(model),
        }
        (out / "model.json").write_text(json.dumps(artifact, sort_keys=True) + "\n", encoding="utf-8")
        _write_json(out / "metrics.json", metrics)
        timings["total"] = time.perf_counter() - t0
        _write_json(out / "timings.json", timings)
    if importance is None:
        print(f"note: feature importance is not defined for {spec.algorithm}", file=sys.stderr)
    return 0


def _row(r) -> str:
    return "" if r < 0 else str(int(r) + 1)


def cmd_tune(args) -> int:
    cfg = build_config(args)
    records = _load(cfg)
    prep = prepare(cfg, records)
    result = _tune(cfg, prep)
    out = Path(cfg.out)
    with _Stage("write"):
        out.mkdir(parents=True, exist_ok=True)
        _write_csv(out / "history.csv", ["generation", "best", "mean", "std"], _history_rows(result))
        _write_json(
            out / "best.json",
            {"spec": result.best_spec.to_dict(), "score": result.best_score, "evaluations": result.evaluations},
        )
    return 0


def load_artifact(path) -> tuple[str, Preprocessor, object]:
    with _Stage("load"):
        with open(path, encoding="utf-8") as fh:
            try:
                art = json.load(fh)
            except json.JSONDecodeError as exc:
                raise SchemaMismatch(f"{path} is not a model artifact: {exc}") from None
        if not isinstance(art, dict) or "version" not in art:
            raise SchemaMismatch(f"{path} is not a model artifact")
        if art["version"] != ARTIFACT_VERSION:
            raise VersionMismatch(f"artifact version {art['version']!r}, expected {ARTIFACT_VERSION}")
        try:
            return art["task"], Preprocessor.from_dict(art["pipeline"]), model_from_dict(art["model"])
        except KeyError as exc:
            raise SchemaMismatch(f"artifact lacks field {exc}") from None


def cmd_predict(args) -> int:
    task, pre, model = load_artifact(args.artifact)
    with _Stage("load"):
        try:
            records = read_dataset(args.input, require_outcome=False)
        except MissingColumn as exc:
            raise SchemaMismatch(f"{args.input}: {exc}") from None
    rows = []
    with _Stage("predict"):
        X = np.zeros((len(records), model.n_features))
        for i, rec in enumerate(records):
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always", UnknownCategoryWarning)
                X[i] = pre.transform([rec], None).values[0]
            for w in caught:
                print(f"warning: row {i + 1}: {w.message}", file=sys.stderr)
        if task == "classification":
            header = ["row", "prediction", *(f"p_{n}" for n in MI_CLASS_NAMES)]
            if records:
                proba = full_proba(model, X)
                pred = np.argmax(proba, axis=1)
                rows = [[i + 1, MI_CLASS_NAMES[p], *map(_num, pr)] for i, (p, pr) in enumerate(zip(pred, proba))]
        else:
            header = ["row", "prediction"]
            if records:
                rows = [[i + 1, _num(v)] for i, v in enumerate(model.predict(X))]
    with _Stage("write"):
        if args.out in (None, "-"):
            w = csv.writer(sys.stdout, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
        else:
            _write_csv(Path(args.out), header, rows)
    return 0


# ------------------------------------------------------------------ parser


def _common(p: argparse.ArgumentParser, out_help: str) -> None:
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--input", help="dataset CSV")
    p.add_argument("--out", help=out_help)
    p.add_argument("--seed", type=int)


def _pipeline(p: argparse.ArgumentParser) -> None:
    p.add_argument("--task", choices=TASKS)
    p.add_argument("--normalizer", choices=METHODS)
    p.add_argument("--model", help="algorithm id, e.g. rf, dt, gnb, lasso")
    p.add_argument("--smote-k", type=int, dest="smote_k")
    p.add_argument("--smogn-threshold", type=float, dest="smogn_threshold")
    p.add_argument("--smogn-noise", type=float, dest="smogn_noise")
    p.add_argument("--fit-on-all", action="store_true", dest="fit_on_all",
                   help="fit transformers and resample before splitting")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="palmi", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a synthetic surrogate dataset")
    p.add_argument("--out", help="output CSV (stdout when omitted)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=1152, help="number of rows")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("summarize", help="descriptive statistics and correlation matrix")
    _common(p, "output directory")
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("run", help="full experiment: split, resample, CV, test evaluation")
    _common(p, "output directory")
    _pipeline(p)
    p.add_argument("--tune", action="store_true", help="run the genetic search before evaluation")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("tune", help="genetic hyperparameter search only")
    _common(p, "output directory")
    _pipeline(p)
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("predict", help="apply a saved model artifact to a CSV")
    p.add_argument("artifact", help="model.json written by 'run'")
    p.add_argument("input", help="CSV with the 12 predictor columns")
    p.add_argument("--out", help="output CSV (stdout when omitted)")
    p.set_defaults(func=cmd_predict)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except StageError as exc:
        print(f"error {exc}", file=sys.stderr)
        return exc.exit_code
    except ConfigError as exc:
        print(f"error [config] {exc}", file=sys.stderr)
        return 2
    except PalmiError as exc:
        print(f"error [{args.command}] {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
