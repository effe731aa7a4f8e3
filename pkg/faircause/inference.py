"""Average treatment effects by cross-fitted double machine learning.

The outcome and the treatment are both residualized on the adjustment set with
nuisance models fitted on the complement of each fold; the effect is the
slope of outcome residuals on treatment residuals (partially linear model).
The adjustment set is the treatment's parents in the causal graph, which
blocks every backdoor path in a DAG.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Sequence, Union

import numpy as np
from numpy.polynomial import Polynomial
from sklearn.linear_model import Ridge
from sklearn.model_selection import KFold
from sklearn.neighbors import KNeighborsRegressor
from sklearn.pipeline import Pipeline, make_pipeline
from sklearn.preprocessing import StandardScaler

from faircause.core import AteQuery, CausalGraph, ObservationMatrix
from faircause.exceptions import (
    ConfigError, DegenerateTreatmentError, ExtrapolationError, InsufficientRowsError,
    InvalidAdjustmentError, RankError, UnknownNodeError,
)
from faircause.settings import (
    COND_MEAN_DEGREE, DEGENERATE_TOLERANCE, DML_FOLDS, EXTRAPOLATION_SLACK, KNN_K, RIDGE_LAMBDA,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LinearRidge:
    """Ridge regression on standardized covariates."""

    lam: float = RIDGE_LAMBDA

    def __post_init__(self) -> None:
        if not self.lam > 0:
            raise ConfigError(f"ridge lambda must be positive, got {self.lam}")

    def make(self, n_train: int) -> Pipeline:
        """Unfitted pipeline for one training fold."""
        return make_pipeline(StandardScaler(), Ridge(alpha=self.lam))


@dataclass(frozen=True)
class KNearest:
    """k-nearest-neighbour regression on standardized covariates."""

    k: int = KNN_K

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")

    def make(self, n_train: int) -> Pipeline:
        """Unfitted pipeline; k is capped at the training size."""
        return make_pipeline(StandardScaler(), KNeighborsRegressor(n_neighbors=min(self.k, n_train)))


Nuisance = Union[LinearRidge, KNearest]


@dataclass(frozen=True)
class DmlConfig:
    """Estimation options."""

    folds: int = DML_FOLDS
    nuisance: Nuisance = field(default_factory=LinearRidge)
    cond_mean_degree: int = COND_MEAN_DEGREE
    seed: int = 0
    n_jobs: int = 1

    def __post_init__(self) -> None:
        if self.folds < 2:
            raise ConfigError(f"folds must be >= 2, got {self.folds}")
        if self.cond_mean_degree < 0:
            raise ConfigError(f"cond_mean_degree must be >= 0, got {self.cond_mean_degree}")
        if self.n_jobs < 1:
            raise ConfigError(f"n_jobs must be >= 1, got {self.n_jobs}")


@dataclass(frozen=True)
class EffectEstimate:
    """Constant marginal effect of a treatment on an outcome."""

    theta: float
    std_error: float
    n: int
    adjustment_set: tuple[str, ...]

    def to_dict(self) -> dict[str, Any]:
        """JSON document for the `ate` subcommand."""
        return {
            "theta": self.theta,
            "std_error": self.std_error,
            "n": self.n,
            "adjustment_set": list(self.adjustment_set),
        }


def adjustment_set(g: CausalGraph, treatment: str, outcome: str) -> list[str]:
    """Backdoor set for treatment -> outcome: the treatment's parents."""
    if outcome not in g:
        raise UnknownNodeError(f"unknown node {outcome!r}")
    parents = g.parents(treatment)
    if treatment == outcome:
        raise ConfigError(f"treatment and outcome are both {treatment!r}")
    if outcome in parents:
        raise InvalidAdjustmentError(f"outcome {outcome!r} is a parent of treatment {treatment!r}")
    return parents


def _residualize(
    target: np.ndarray, covariates: np.ndarray, train: np.ndarray, test: np.ndarray, cfg: DmlConfig
) -> np.ndarray:
    if covariates.shape[1] == 0:
        return target[test] - target.mean()
    model = cfg.nuisance.make(len(train)).fit(covariates[train], target[train])
    return target[test] - model.predict(covariates[test])


def dml_effect(
    data: ObservationMatrix,
    treatment: str,
    outcome: str,
    adjust: Sequence[str],
    cfg: DmlConfig = DmlConfig(),
) -> EffectEstimate:
    """Cross-fitted residual-on-residual effect estimate.

    Args:
        data: Observations.
        treatment: Treatment column.
        outcome: Outcome column.
        adjust: Adjustment columns; empty centers both columns on their
            full-sample means, which reproduces the least-squares slope.
        cfg: Folds, nuisance learner and seed.

    Returns:
        The effect with its influence-function standard error.
    """
    adjust = sorted(adjust)
    for name in (treatment, outcome, *adjust):
        data.index(name)
    if treatment == outcome:
        raise ConfigError(f"treatment and outcome are both {treatment!r}")
    if treatment in adjust or outcome in adjust:
        raise InvalidAdjustmentError("treatment and outcome cannot be adjusted for")
    n = data.n_rows
    if n < 10 * cfg.folds:
        raise InsufficientRowsError(f"need at least {10 * cfg.folds} runs for {cfg.folds} folds, got {n}")

    t = data.column(treatment)
    y = data.column(outcome)
    z = data.columns(adjust)
    splits = list(KFold(n_splits=cfg.folds, shuffle=True, random_state=cfg.seed).split(t))

    def fit_fold(split: tuple[np.ndarray, np.ndarray]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        train, test = split
        return test, _residualize(t, z, train, test, cfg), _residualize(y, z, train, test, cfg)

    if cfg.n_jobs > 1:
        with ThreadPoolExecutor(max_workers=cfg.n_jobs) as pool:
            folds = list(pool.map(fit_fold, splits))
    else:
        folds = [fit_fold(s) for s in splits]

    r_t = np.empty(n)
    r_y = np.empty(n)
    for test, res_t, res_y in folds:
        r_t[test] = res_t
        r_y[test] = res_y

    denominator = float(r_t @ r_t)
    if denominator < DEGENERATE_TOLERANCE:
        raise DegenerateTreatmentError(
            f"{treatment!r} has no residual variation given {adjust or 'no adjustment'}"
        )
    theta = float(r_t @ r_y) / denominator
    psi = r_t * (r_y - theta * r_t) / np.mean(r_t ** 2)
    std_error = float(np.std(psi, ddof=1) / math.sqrt(n))
    logger.debug(
        "DML %s -> %s adjusting for %s over %d folds: theta=%.4f (se %.4f)",
        treatment, outcome, adjust, cfg.folds, theta, std_error,
    )
    return EffectEstimate(theta=theta, std_error=std_error, n=n, adjustment_set=tuple(adjust))


def estimate_ate(
    data: ObservationMatrix, g: CausalGraph, q: AteQuery, cfg: DmlConfig = DmlConfig()
) -> tuple[EffectEstimate, float]:
    """Effect estimate with backdoor adjustment and the resulting two-point ATE."""
    adjust = adjustment_set(g, q.treatment, q.outcome)
    estimate = dml_effect(data, q.treatment, q.outcome, adjust, cfg)
    return estimate, estimate.theta * (q.x1 - q.x2)


def ate(data: ObservationMatrix, g: CausalGraph, q: AteQuery, cfg: DmlConfig = DmlConfig()) -> float:
    """E[Y|do(X=x1)] - E[Y|do(X=x2)] under the partially linear model."""
    if q.x1 == q.x2:
        return 0.0
    return estimate_ate(data, g, q, cfg)[1]


def conditional_mean(
    data: ObservationMatrix, var: str, given: str, value: float, cfg: DmlConfig = DmlConfig()
) -> float:
    """E[var | given = value] from a least-squares polynomial fit."""
    x = data.column(given)
    y = data.column(var)
    degree = cfg.cond_mean_degree
    distinct = np.unique(x).size
    if distinct < degree + 1:
        raise RankError(f"{given!r} has {distinct} distinct values, a degree-{degree} fit needs {degree + 1}")
    low, high = float(x.min()) - EXTRAPOLATION_SLACK, float(x.max()) + EXTRAPOLATION_SLACK
    if not low <= value <= high:
        raise ExtrapolationError(f"{given}={value} lies outside the observed range [{low:.4g}, {high:.4g}]")
    return float(Polynomial.fit(x, y, degree)(value))
