"""Fairness and performance metrics computed from prediction tables.

Group metrics follow the unprivileged-minus-privileged convention, so that an
SPD or AOD of 0 and a DI of 1 denote parity. Group `1` of the sensitive column
is privileged and label `1` is the favorable class.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Union

import numpy as np
import pandas as pd
from scipy.spatial.distance import cdist
from sklearn.metrics import accuracy_score, f1_score
from sklearn.preprocessing import StandardScaler

from faircause.exceptions import (
    DivisionByZeroError, EmptyGroupError, InsufficientRowsError, NumericalError, ParseError,
    SchemaError,
)
from faircause.settings import CONSISTENCY_K

logger = logging.getLogger(__name__)

REQUIRED_COLUMNS = ("sensitive", "label", "prediction")
METRIC_NAMES = ("acc", "f1", "di", "spd", "aod", "cons", "ti")

# Neighbours are searched in blocks of rows to bound the distance matrix size.
_NEIGHBOUR_BLOCK = 1024


@dataclass(frozen=True, eq=False)
class PredictionTable:
    """Binary predictions of a classifier with the sensitive attribute."""

    sensitive: np.ndarray
    label: np.ndarray
    prediction: np.ndarray
    features: np.ndarray

    def __post_init__(self) -> None:
        columns = {}
        for name in REQUIRED_COLUMNS:
            values = np.asarray(getattr(self, name))
            if values.ndim != 1:
                raise SchemaError(f"{name} must be one-dimensional")
            if not np.isin(values, (0, 1)).all():
                raise SchemaError(f"{name} must only contain 0 and 1")
            columns[name] = values.astype(int)
        n = len(columns["sensitive"])
        if n == 0:
            raise SchemaError("prediction table is empty")
        if any(len(v) != n for v in columns.values()):
            raise SchemaError("columns have different lengths")

        features = np.asarray(self.features, dtype=float)
        if features.ndim == 1:
            features = features.reshape(n, -1) if features.size else np.empty((n, 0))
        if features.shape[0] != n:
            raise SchemaError("feature vectors must have one row per prediction")
        if not np.isfinite(features).all():
            raise ParseError("features contain missing or non-finite values")

        for name, values in columns.items():
            object.__setattr__(self, name, values)
        object.__setattr__(self, "features", features)

    def __len__(self) -> int:
        return len(self.sensitive)

    def swap_groups(self) -> PredictionTable:
        """The same table with privileged and unprivileged groups exchanged."""
        return PredictionTable(1 - self.sensitive, self.label, self.prediction, self.features)


@dataclass(frozen=True)
class GroupRates:
    """Selection, true-positive and false-positive rates per group."""

    sel_priv: float
    sel_unpriv: float
    tpr_priv: float
    tpr_unpriv: float
    fpr_priv: float
    fpr_unpriv: float


def load_prediction_table(csv_path: Union[str, Path]) -> PredictionTable:
    """Read a `sensitive,label,prediction,f1..fd` CSV file."""
    source = str(csv_path)
    try:
        frame = pd.read_csv(csv_path, encoding="utf-8")
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ParseError(f"cannot read prediction table: {e}", source=source) from e

    missing = [c for c in REQUIRED_COLUMNS if c not in frame.columns]
    if missing:
        raise SchemaError(f"missing columns: {', '.join(missing)}", source=source)
    feature_names = [c for c in frame.columns if c not in REQUIRED_COLUMNS]
    try:
        return PredictionTable(
            sensitive=frame["sensitive"].to_numpy(),
            label=frame["label"].to_numpy(),
            prediction=frame["prediction"].to_numpy(),
            features=frame[feature_names].to_numpy(dtype=float),
        )
    except (SchemaError, ParseError) as e:
        raise type(e)(e.message, source=source) from e
    except ValueError as e:
        raise ParseError(f"non-numeric feature: {e}", source=source) from e


def _rate(mask: np.ndarray, values: np.ndarray, what: str) -> float:
    if not mask.any():
        raise EmptyGroupError(f"no rows for {what}")
    return float(values[mask].mean())


def group_rates(t: PredictionTable) -> GroupRates:
    """Per-group selection rate, TPR and FPR."""
    priv = t.sensitive == 1
    unpriv = ~priv
    pos = t.label == 1
    neg = ~pos
    return GroupRates(
        sel_priv=_rate(priv, t.prediction, "privileged group"),
        sel_unpriv=_rate(unpriv, t.prediction, "unprivileged group"),
        tpr_priv=_rate(priv & pos, t.prediction, "privileged positives"),
        tpr_unpriv=_rate(unpriv & pos, t.prediction, "unprivileged positives"),
        fpr_priv=_rate(priv & neg, t.prediction, "privileged negatives"),
        fpr_unpriv=_rate(unpriv & neg, t.prediction, "unprivileged negatives"),
    )


def _selection_rates(t: PredictionTable) -> tuple[float, float]:
    priv = t.sensitive == 1
    return (
        _rate(~priv, t.prediction, "unprivileged group"),
        _rate(priv, t.prediction, "privileged group"),
    )


def spd(t: PredictionTable) -> float:
    """Statistical parity difference P(ŷ=1|unpriv) - P(ŷ=1|priv)."""
    unpriv, priv = _selection_rates(t)
    return unpriv - priv


def di(t: PredictionTable) -> float:
    """Disparate impact P(ŷ=1|unpriv) / P(ŷ=1|priv)."""
    unpriv, priv = _selection_rates(t)
    if priv == 0:
        raise DivisionByZeroError("privileged selection rate is 0")
    return unpriv / priv


def aod(t: PredictionTable) -> float:
    """Average odds difference: mean of the FPR and TPR gaps."""
    r = group_rates(t)
    return 0.5 * ((r.fpr_unpriv - r.fpr_priv) + (r.tpr_unpriv - r.tpr_priv))


def theil(t: PredictionTable) -> float:
    """Theil index of the per-row benefit b = ŷ - y + 1."""
    b = (t.prediction - t.label + 1).astype(float)
    mu = b.mean()
    if mu == 0:
        return 0.0
    ratio = b / mu
    terms = np.zeros_like(ratio)
    nonzero = ratio > 0
    terms[nonzero] = ratio[nonzero] * np.log(ratio[nonzero])
    return float(max(terms.mean(), 0.0))


def consistency(t: PredictionTable, k: int = CONSISTENCY_K) -> float:
    """Agreement of each prediction with its k nearest neighbours.

    Neighbours are found by Euclidean distance on standardized features,
    excluding the row itself; equal distances go to the lower row index.
    """
    n = len(t)
    if k < 1:
        raise InsufficientRowsError(f"k must be positive, got {k}")
    if n <= k:
        raise InsufficientRowsError(f"consistency needs more than k={k} rows, got {n}")
    if t.features.shape[1] == 0:
        raise SchemaError("consistency needs feature columns")

    x = StandardScaler().fit_transform(t.features)
    y = t.prediction.astype(float)
    deviation = 0.0
    for start in range(0, n, _NEIGHBOUR_BLOCK):
        rows = np.arange(start, min(start + _NEIGHBOUR_BLOCK, n))
        dist = cdist(x[rows], x)
        dist[np.arange(len(rows)), rows] = np.inf
        neighbours = np.argsort(dist, axis=1, kind="stable")[:, :k]
        deviation += float(np.abs(y[rows] - y[neighbours].mean(axis=1)).sum())
    return 1.0 - deviation / n


def accuracy_f1(t: PredictionTable) -> tuple[float, float]:
    """Accuracy and F1 of the favorable class; F1 is 0 when undefined."""
    acc = accuracy_score(t.label, t.prediction)
    f1 = f1_score(t.label, t.prediction, pos_label=1, zero_division=0)
    return float(acc), float(f1)


def compute_all(t: PredictionTable, k: int = CONSISTENCY_K) -> dict[str, float]:
    """Every metric in `METRIC_NAMES` order.

    A metric whose precondition fails is reported as NaN and logged.
    """
    acc, f1 = accuracy_f1(t)
    metrics: dict[str, float] = {"acc": acc, "f1": f1}
    computations: dict[str, Callable[[], float]] = {
        "di": lambda: di(t),
        "spd": lambda: spd(t),
        "aod": lambda: aod(t),
        "cons": lambda: consistency(t, k),
        "ti": lambda: theil(t),
    }
    for name, compute in computations.items():
        try:
            metrics[name] = compute()
        except (NumericalError, SchemaError) as e:
            logger.warning("Metric %s is undefined: %s", name, e)
            metrics[name] = math.nan
    return metrics


def metrics_row_text(metrics: dict[str, float]) -> str:
    """One-row CSV with a header."""
    return pd.DataFrame([metrics], columns=list(METRIC_NAMES)).to_csv(index=False, lineterminator="\n")
