"""Exception hierarchy shared across the package."""

from __future__ import annotations


class SegtreeError(Exception):
    """Base class; every error carries a machine-readable ``code``."""

    code = "error"

    def payload(self) -> dict:
        return {"code": self.code, "message": str(self)}


# --- ingestion -------------------------------------------------------------

class CsvError(SegtreeError):
    code = "csv_error"


class MissingTimestampColumn(CsvError):
    code = "missing_timestamp_column"


class NonMonotonicAfterSort(CsvError):
    """Duplicate timestamps remain after sorting by timestamp."""

    code = "non_monotonic_after_sort"


class RaggedRow(CsvError):
    code = "ragged_row"


class UnparsableValue(CsvError):
    code = "unparsable_value"

    def __init__(self, message: str, row: int | None = None, column: str | None = None):
        super().__init__(message)
        self.row = row
        self.column = column

    def payload(self) -> dict:
        out = super().payload()
        out["row"] = self.row
        out["column"] = self.column
        return out


class IntervalOutOfBounds(SegtreeError):
    code = "interval_out_of_bounds"


# --- techniques ------------------------------------------------------------

class TechniqueError(SegtreeError):
    code = "technique_error"


class DimensionKindMismatch(TechniqueError):
    code = "dimension_kind_mismatch"


class UnknownDimension(TechniqueError):
    code = "unknown_dimension"


class InsufficientData(TechniqueError):
    """Segment too short for the technique; callers degrade to [0, L]."""

    code = "insufficient_data"


# --- query parsing ---------------------------------------------------------

class QueryError(SegtreeError):
    code = "query_error"


class QuerySyntaxError(QueryError):
    code = "query_syntax_error"

    def __init__(self, message: str, position: str = ""):
        super().__init__(message)
        self.position = position

    def payload(self) -> dict:
        out = super().payload()
        out["position"] = self.position
        return out


class UnknownTechnique(QueryError):
    code = "unknown_technique"


class ParameterOutOfRange(QueryError):
    code = "parameter_out_of_range"

    def __init__(self, message: str, path: str = ""):
        super().__init__(message)
        self.path = path

    def payload(self) -> dict:
        out = super().payload()
        out["path"] = self.path
        return out


class ArityError(QueryError):
    code = "arity_error"


# --- evaluation / tree -----------------------------------------------------

class EvaluationError(SegtreeError):
    code = "evaluation_error"


class EvaluationCancelled(EvaluationError):
    code = "evaluation_cancelled"


class UnknownNode(SegtreeError):
    code = "unknown_node"


# --- guidance / anomaly ----------------------------------------------------

class EmptySequence(SegtreeError):
    code = "empty_sequence"


class SingleChild(SegtreeError):
    code = "single_child"


class TooFewPoints(SegtreeError):
    code = "too_few_points"


class PeriodTooLong(SegtreeError):
    code = "period_too_long"


# --- service ---------------------------------------------------------------

class NotFound(SegtreeError):
    code = "not_found"


class Conflict(SegtreeError):
    code = "conflict"
