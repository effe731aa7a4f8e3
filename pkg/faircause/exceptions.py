"""Custom exceptions for faircause."""
from typing import Optional


class FairCauseError(Exception):
    """Generic error for faircause.

    Every error raised by the library derives from this class. The command line
    maps it to `exit_code` and reports `source` (the offending file or flag) in
    front of the message.
    """

    exit_code = 2

    def __init__(self, message: str, source: Optional[str] = None) -> None:
        super().__init__(message)
        self.message = message
        self.source = source

    def __str__(self) -> str:
        if self.source:
            return f"{self.source}: {self.message}"
        return self.message


class UsageError(FairCauseError):
    """Invalid command line usage."""

    exit_code = 1


class IoError(FairCauseError):
    """An artifact could not be written or read."""


class MixedPairError(FairCauseError):
    """Analyses of different metric pairs were aggregated together."""


class DataError(FairCauseError):
    """Input data or configuration is malformed."""


class SchemaError(DataError):
    """Columns are undeclared, missing or duplicated."""


class ParseError(DataError):
    """A cell or document could not be parsed."""


class RangeError(DataError):
    """A value lies outside its admissible range."""


class ConfigError(DataError):
    """A configuration object violates its invariants."""


class GraphError(FairCauseError):
    """A causal graph violates its invariants or is queried wrongly."""


class CycleError(GraphError):
    """The edges contain a directed cycle."""


class ExogeneityError(GraphError):
    """An edge terminates at an interventional node."""


class UnknownNodeError(GraphError):
    """A name does not belong to the graph or study."""


class NodeSetMismatchError(GraphError):
    """Two graphs are defined over different node sets."""


class InvalidAdjustmentError(GraphError):
    """The outcome is a parent of the treatment."""


class NumericalError(FairCauseError):
    """A computation is undefined for the given data."""


class DegenerateTreatmentError(NumericalError):
    """The treatment has no residual variation after adjustment."""


class ExtrapolationError(NumericalError):
    """A conditional mean was requested outside the observed range."""


class RankError(NumericalError):
    """A regression design is rank deficient."""


class DivisionByZeroError(NumericalError):
    """A ratio metric has a zero denominator."""


class EmptyGroupError(NumericalError):
    """A group needed by a fairness metric has no rows."""


class InsufficientRowsError(NumericalError):
    """Too few rows for the requested computation."""
