"""Loading, validation, labeling and descriptive statistics of the curated
observation table.

Each row of the input CSV is one literature observation: twelve experimental
predictors describing the plasma treatment, the activated liquid and the
microbial assay, plus the measured log10 reduction (MI).
"""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, fields
from typing import IO, Iterable, Sequence

import numpy as np

from .errors import (
    EmptyDataset,
    InvalidLoad,
    InvalidRecord,
    MissingColumn,
    MissingValue,
    UnparsableNumeric,
)

MI_TOLERANCE = 1e-9


@dataclass(frozen=True)
class Predictor:
    field: str
    column: str
    kind: str  # "numeric" or "nominal"
    unit: str = ""
    lower: float | None = None
    strict: bool = False  # lower bound excluded


@dataclass(frozen=True)
class PredictorSchema:
    predictors: tuple[Predictor, ...]
    outcome: Predictor

    @property
    def numeric(self) -> tuple[Predictor, ...]:
        return tuple(p for p in self.predictors if p.kind == "numeric")

    @property
    def nominal(self) -> tuple[Predictor, ...]:
        return tuple(p for p in self.predictors if p.kind == "nominal")

    @property
    def columns(self) -> tuple[str, ...]:
        return tuple(p.column for p in self.predictors) + (self.outcome.column,)

    def predictor(self, field: str) -> Predictor:
        for p in self.predictors + (self.outcome,):
            if p.field == field:
                return p
        raise KeyError(field)


SCHEMA = PredictorSchema(
    predictors=(
        Predictor("plasma_treatment_type", "plasma_treatment_type", "nominal"),
        Predictor("gas_type", "gas_type", "nominal"),
        Predictor("discharge_gap", "discharge_gap_mm", "numeric", "mm", 0.0),
        Predictor("plasma_treatment_time", "plasma_treatment_time_s", "numeric", "s", 0.0),
        Predictor("liquid_type", "liquid_type", "nominal"),
        Predictor("treatment_volume", "treatment_volume_ml", "numeric", "mL", 0.0, strict=True),
        Predictor("microbial_strain", "microbial_strain", "nominal"),
        Predictor("initial_microbial_load", "initial_load_log", "numeric", "log", 0.0, strict=True),
        Predictor("pal_mo_volume_ratio", "pal_mo_ratio", "numeric", "fold", 1.0),
        Predictor("contact_time", "contact_time_min", "numeric", "min", 0.0),
        Predictor("incubation_temperature", "incubation_temp_c", "numeric", "degC"),
        # hours; the source prose also quotes this range in minutes
        Predictor("post_storage_time", "post_storage_h", "numeric", "h", 0.0),
    ),
    outcome=Predictor("mi_log_reduction", "mi_log_reduction", "numeric", "log", 0.0),
)


@dataclass(frozen=True)
class RawRecord:
    plasma_treatment_type: str
    gas_type: str
    discharge_gap: float
    plasma_treatment_time: float
    liquid_type: str
    treatment_volume: float
    microbial_strain: str
    initial_microbial_load: float
    pal_mo_volume_ratio: float
    contact_time: float
    incubation_temperature: float
    post_storage_time: float
    mi_log_reduction: float | None = None


RECORD_FIELDS = tuple(f.name for f in fields(RawRecord))


class MiClass(enum.IntEnum):
    NONE = 0
    WEAK = 1
    STRONG = 2
    COMPLETE = 3


MI_CLASS_NAMES = ("None", "Weak", "Strong", "Complete")


def normalize_token(token: str) -> str:
    return token.strip().casefold()


def _parse_number(text: str, row: int, column: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise UnparsableNumeric(row, column, text) from None
    if not math.isfinite(value):
        raise UnparsableNumeric(row, column, text)
    return value


def _check_bounds(pred: Predictor, value: float, row: int) -> None:
    if pred.lower is None:
        return
    if value < pred.lower or (pred.strict and value == pred.lower):
        op = ">" if pred.strict else ">="
        raise InvalidRecord(row, pred.column, f"value {value} violates {op} {pred.lower}")


def parse_dataset(
    source: IO[str] | Iterable[str],
    schema: PredictorSchema = SCHEMA,
    require_outcome: bool = True,
) -> list[RawRecord]:
    """Parse a CSV stream into validated records.

    Header names are matched case-insensitively. Row numbers in errors are
    1-based data rows (the header is row 0). Any error aborts the whole parse.
    """
    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise MissingColumn(schema.predictors[0].column) from None
    positions = {h.strip().casefold(): i for i, h in enumerate(header)}

    wanted = list(schema.predictors)
    if require_outcome or schema.outcome.column.casefold() in positions:
        wanted.append(schema.outcome)
    for pred in wanted:
        if pred.column.casefold() not in positions:
            raise MissingColumn(pred.column)

    records = []
    for row_no, row in enumerate(reader, start=1):
        if not row or all(not cell.strip() for cell in row):
            continue
        values = {}
        for pred in wanted:
            pos = positions[pred.column.casefold()]
            cell = row[pos].strip() if pos < len(row) else ""
            if cell == "":
                raise MissingValue(row_no, pred.column)
            if pred.kind == "nominal":
                values[pred.field] = normalize_token(cell)
            else:
                value = _parse_number(cell, row_no, pred.column)
                _check_bounds(pred, value, row_no)
                values[pred.field] = value
        mi = values.get("mi_log_reduction")
        if mi is not None and mi > values["initial_microbial_load"] + MI_TOLERANCE:
            raise InvalidRecord(
                row_no, schema.outcome.column,
                f"reduction {mi} exceeds initial load {values['initial_microbial_load']}",
            )
        records.append(RawRecord(**values))
    return records


def read_dataset(path, schema: PredictorSchema = SCHEMA, require_outcome: bool = True) -> list[RawRecord]:
    with open(path, newline="", encoding="utf-8") as fh:
        return parse_dataset(fh, schema, require_outcome)


def write_dataset(records: Sequence[RawRecord], fh: IO[str], schema: PredictorSchema = SCHEMA) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    with_outcome = any(r.mi_log_reduction is not None for r in records) or not records
    cols = list(schema.predictors) + ([schema.outcome] if with_outcome else [])
    writer.writerow([p.column for p in cols])
    for rec in records:
        writer.writerow([_fmt(getattr(rec, p.field)) for p in cols])


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def label_mi(mi: float, n: float) -> MiClass:
    """Four-level ordinal class of a log reduction relative to the initial load.

    None: mi <= 0.1n, Weak: 0.1n < mi < 0.5n, Strong: 0.5n <= mi < 0.9n,
    Complete: mi >= 0.9n.
    """
    if not n > 0:
        raise InvalidLoad(f"initial load must be positive, got {n}")
    if mi <= 0.1 * n:
        return MiClass.NONE
    if mi < 0.5 * n:
        return MiClass.WEAK
    if mi < 0.9 * n:
        return MiClass.STRONG
    return MiClass.COMPLETE


def label_records(records: Sequence[RawRecord]) -> np.ndarray:
    return np.array(
        [int(label_mi(r.mi_log_reduction, r.initial_microbial_load)) for r in records],
        dtype=np.int64,
    )


def class_counts(labels: Iterable[int]) -> dict[str, int]:
    counts = {name: 0 for name in MI_CLASS_NAMES}
    for lab in labels:
        counts[MI_CLASS_NAMES[int(lab)]] += 1
    return counts


@dataclass(frozen=True)
class FieldStats:
    count: int
    mean: float
    std: float
    min: float
    max: float


DatasetSummary = dict  # field name -> FieldStats, schema order, outcome last


def numeric_fields(schema: PredictorSchema = SCHEMA) -> tuple[str, ...]:
    return tuple(p.field for p in schema.numeric) + (schema.outcome.field,)


def numeric_table(records: Sequence[RawRecord], schema: PredictorSchema = SCHEMA) -> np.ndarray:
    names = numeric_fields(schema)
    return np.array([[getattr(r, f) for f in names] for r in records], dtype=float).reshape(
        len(records), len(names)
    )


def summarize(records: Sequence[RawRecord], ddof: int = 0, schema: PredictorSchema = SCHEMA) -> DatasetSummary:
    """Count, mean, standard deviation, min and max of every numeric column.

    ``ddof=0`` (default) divides by N; pass ``ddof=1`` for the sample
    convention. The outcome column is included after the predictors.
    """
    if not records:
        raise EmptyDataset("cannot summarize an empty dataset")
    if ddof and len(records) <= ddof:
        raise EmptyDataset(f"need more than {ddof} record(s) for ddof={ddof}")
    table = numeric_table(records, schema)
    # sort per column so the result is independent of row order
    table = np.sort(table, axis=0)
    out = {}
    for j, name in enumerate(numeric_fields(schema)):
        col = table[:, j]
        mean = math.fsum(col) / len(col)
        var = math.fsum((col - mean) ** 2) / (len(col) - ddof)
        out[name] = FieldStats(len(col), mean, math.sqrt(var), float(col[0]), float(col[-1]))
    return out


def pearson(x, y) -> float:
    """Pearson correlation; NaN when either side has zero variance."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        return float("nan")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


def correlation_matrix(records: Sequence[RawRecord], schema: PredictorSchema = SCHEMA):
    """Pearson matrix over the numeric predictors and the outcome.

    Returns ``(names, matrix)``. Cells involving a zero-variance column are
    NaN (undefined) rather than raising.
    """
    if len(records) < 2:
        raise EmptyDataset("correlation needs at least 2 records")
    names = numeric_fields(schema)
    table = numeric_table(records, schema)
    k = len(names)
    mat = np.empty((k, k))
    for i in range(k):
        for j in range(i, k):
            if i == j:
                r = 1.0 if np.ptp(table[:, i]) > 0 else float("nan")
            else:
                r = pearson(table[:, i], table[:, j])
            mat[i, j] = mat[j, i] = r
    return names, mat
