"""Exception hierarchy shared by every stage of the pipeline."""


class PalmiError(Exception):
    """Base class; the CLI maps these to a nonzero exit with a stage tag."""


class DatasetError(PalmiError):
    pass


class MissingColumn(DatasetError):
    def __init__(self, column):
        super().__init__(f"missing column {column!r}")
        self.column = column


class UnparsableNumeric(DatasetError):
    def __init__(self, row, column, value):
        super().__init__(f"row {row}, column {column!r}: cannot parse {value!r} as a number")
        self.row, self.column, self.value = row, column, value


class MissingValue(DatasetError):
    def __init__(self, row, column):
        super().__init__(f"row {row}, column {column!r}: missing value")
        self.row, self.column = row, column


class InvalidRecord(DatasetError):
    def __init__(self, row, column, reason):
        super().__init__(f"row {row}, column {column!r}: {reason}")
        self.row, self.column = row, column


class InvalidLoad(DatasetError):
    pass


class EmptyDataset(DatasetError):
    pass


class ResampleError(PalmiError):
    pass


class TooFewSamples(ResampleError):
    def __init__(self, label, count):
        super().__init__(f"class {label} has {count} row(s); at least 2 are needed")
        self.label, self.count = label, count


class ModelError(PalmiError):
    pass


class SpecInvalid(ModelError):
    pass


class SingleClass(ModelError):
    pass


class NonFinite(ModelError):
    pass


class DimensionMismatch(ModelError):
    pass


class EvaluationError(PalmiError):
    pass


class TooSmall(EvaluationError):
    pass


class ClassTooSmall(EvaluationError):
    def __init__(self, label, count, k):
        super().__init__(f"class {label} has {count} member(s), fewer than k={k} folds")
        self.label, self.count, self.k = label, count, k


class LengthMismatch(EvaluationError):
    pass


class BadProba(EvaluationError):
    pass


class ZeroVariance(EvaluationError):
    pass


class DegenerateGroups(EvaluationError):
    pass


class FoldError(EvaluationError):
    def __init__(self, fold, cause):
        super().__init__(f"fold {fold}: {cause}")
        self.fold, self.cause = fold, cause


class ArtifactError(PalmiError):
    pass


class SchemaMismatch(ArtifactError):
    pass


class VersionMismatch(ArtifactError):
    pass


class ConfigError(PalmiError):
    pass
