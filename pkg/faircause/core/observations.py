"""Run tables: one row per pipeline run, one column per variable."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np
import pandas as pd
from sklearn.preprocessing import StandardScaler

from faircause.exceptions import (
    ParseError, RangeError, SchemaError, UnknownNodeError,
)

from .variables import VariableSpec, as_specs, load_study

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ObservationMatrix:
    """N runs by M variables of real measurements.

    The data array is stored read-only; column order follows `variables`.
    """

    variables: tuple[VariableSpec, ...]
    data: np.ndarray

    def __post_init__(self) -> None:
        specs = as_specs(self.variables)
        data = np.array(self.data, dtype=float, copy=True)
        if data.ndim != 2 or data.shape[1] != len(specs):
            raise SchemaError(f"data shape {data.shape} does not match {len(specs)} variables")
        if data.shape[0] < 2:
            raise SchemaError(f"at least 2 runs are required, got {data.shape[0]}")
        if not np.isfinite(data).all():
            col = int(np.where(~np.isfinite(data).all(axis=0))[0][0])
            raise ParseError(f"column {specs[col].name!r} has missing or non-finite values")
        for j, spec in enumerate(specs):
            if spec.is_interventional:
                column = data[:, j]
                if column.min() < 0.0 or column.max() > 1.0:
                    bad = column[(column < 0.0) | (column > 1.0)][0]
                    raise RangeError(f"interventional column {spec.name!r} has value {bad} outside [0, 1]")
        data.flags.writeable = False
        object.__setattr__(self, "variables", specs)
        object.__setattr__(self, "data", data)

    @property
    def names(self) -> list[str]:
        """Variable names in column order."""
        return [s.name for s in self.variables]

    @property
    def n_rows(self) -> int:
        """Number of runs."""
        return int(self.data.shape[0])

    def index(self, name: str) -> int:
        """Column position of `name`."""
        for j, spec in enumerate(self.variables):
            if spec.name == name:
                return j
        raise UnknownNodeError(f"unknown variable {name!r}")

    def spec(self, name: str) -> VariableSpec:
        """Declaration of `name`."""
        return self.variables[self.index(name)]

    def column(self, name: str) -> np.ndarray:
        """Values of one variable."""
        return self.data[:, self.index(name)]

    def columns(self, names: Sequence[str]) -> np.ndarray:
        """Sub-matrix with the given columns, shape (N, len(names))."""
        return self.data[:, [self.index(n) for n in names]]

    def standardized(self) -> np.ndarray:
        """Columns scaled to zero mean and unit variance (constant columns centred only)."""
        return StandardScaler().fit_transform(self.data)

    def to_frame(self) -> pd.DataFrame:
        """Copy as a pandas DataFrame."""
        return pd.DataFrame(np.array(self.data), columns=self.names)


def _parse_column(frame: pd.DataFrame, name: str, source: str) -> np.ndarray:
    column = frame[name]
    if column.isna().any():
        row = int(np.where(column.isna())[0][0])
        raise ParseError(f"missing value in column {name!r}, row {row + 1}", source=source)
    if pd.api.types.is_bool_dtype(column):
        raise ParseError(f"non-real cell {column.iloc[0]!r} in column {name!r}, row 1", source=source)
    if not (pd.api.types.is_float_dtype(column) or pd.api.types.is_integer_dtype(column)):
        for row, cell in enumerate(column):
            if isinstance(cell, (bool, np.bool_)):
                raise ParseError(f"non-real cell {cell!r} in column {name!r}, row {row + 1}", source=source)
            try:
                float(cell)
            except (TypeError, ValueError):
                raise ParseError(f"non-numeric cell {cell!r} in column {name!r}, row {row + 1}", source=source)
    return column.to_numpy(dtype=float)


def load_run_table(csv_path: Union[str, Path], config_path: Union[str, Path]) -> ObservationMatrix:
    """Load a run table and order its columns per the study config.

    Args:
        csv_path: CSV with a header row of variable names.
        config_path: Study config declaring every column.

    Returns:
        The validated observation matrix.
    """
    specs = load_study(config_path)
    source = str(csv_path)
    try:
        frame = pd.read_csv(csv_path, encoding="utf-8", float_precision="round_trip")
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise ParseError(f"cannot read run table: {e}", source=source) from e

    header = [str(c) for c in frame.columns]
    if len(set(header)) != len(header):
        raise SchemaError("duplicate column names in header", source=source)
    declared = [s.name for s in specs]
    undeclared = sorted(set(header) - set(declared))
    if undeclared:
        raise SchemaError(f"undeclared columns: {', '.join(undeclared)}", source=source)
    missing = [n for n in declared if n not in header]
    if missing:
        raise SchemaError(f"declared columns missing from table: {', '.join(missing)}", source=source)

    data = np.column_stack([_parse_column(frame, name, source) for name in declared]) if len(frame) else \
        np.empty((0, len(declared)))
    try:
        matrix = ObservationMatrix(specs, data)
    except (RangeError, SchemaError, ParseError) as e:
        raise type(e)(e.message, source=source) from e
    logger.debug("Loaded %d runs x %d variables from %s", matrix.n_rows, len(specs), source)
    return matrix


def write_run_table(matrix: ObservationMatrix, csv_path: Union[str, Path]) -> None:
    """Write a run table whose floats reload bit-for-bit."""
    Path(csv_path).write_text(run_table_text(matrix), encoding="utf-8")


def run_table_text(matrix: ObservationMatrix) -> str:
    """CSV text of a run table using shortest round-trip float formatting."""
    return matrix.to_frame().to_csv(index=False, lineterminator="\n")
