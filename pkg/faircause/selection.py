"""Choosing fairness-method settings that optimize a weighted objective.

Each objective metric gets a response surface: an OLS fit of the metric on
the method ratios with linear and pairwise-interaction terms. Candidate plans
switch on at most `max_active` methods at ratios on a regular grid; the plan
with the best predicted, normalized and sign-oriented improvement wins.
"""
from __future__ import annotations

import itertools
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional, Sequence, Union

import numpy as np
import statsmodels.api as sm

from faircause.core import CausalGraph, Objective, ObservationMatrix, SignSpec, VariableSpec, is_cause
from faircause.exceptions import (
    ConfigError, IoError, ParseError, RankError, SchemaError, UnknownNodeError,
)
from faircause.inference import DmlConfig
from faircause.settings import GRID_STEP, MAX_ACTIVE

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ObjectiveTerm:
    """One weighted metric of a selection objective."""

    metric: str
    weight: float
    sign: SignSpec = field(default_factory=SignSpec)

    def __post_init__(self) -> None:
        if not (math.isfinite(self.weight) and self.weight >= 0):
            raise ConfigError(f"weight of {self.metric!r} must be finite and >= 0, got {self.weight}")


@dataclass(frozen=True)
class SelectionObjective:
    """Weighted sum of normalized metric improvements.

    `scales` overrides the per-metric normalization, which defaults to the
    sample standard deviation of the metric column.
    """

    terms: tuple[ObjectiveTerm, ...]
    scales: Optional[Mapping[str, float]] = None

    def __post_init__(self) -> None:
        if not self.terms:
            raise ConfigError("objective needs at least one term")
        metrics = [t.metric for t in self.terms]
        if len(set(metrics)) != len(metrics):
            raise ConfigError("objective lists a metric twice")
        if all(t.weight == 0 for t in self.terms):
            raise ConfigError("objective weights are all zero")
        for metric, scale in (self.scales or {}).items():
            if not (math.isfinite(scale) and scale > 0):
                raise ConfigError(f"scale of {metric!r} must be positive, got {scale}")

    @property
    def metrics(self) -> list[str]:
        """Objective metrics in term order."""
        return [t.metric for t in self.terms]


def _design(points: np.ndarray) -> np.ndarray:
    """Ratios followed by their pairwise products."""
    pairs = [points[:, i] * points[:, j] for i, j in itertools.combinations(range(points.shape[1]), 2)]
    return np.column_stack([points, *pairs]) if pairs else points


@dataclass(frozen=True, eq=False)
class ResponseSurface:
    """Fitted metric as a function of method ratios."""

    methods: tuple[str, ...]
    metric: str
    coef: np.ndarray
    bse: np.ndarray

    @property
    def terms(self) -> list[str]:
        """Regressor names, `a:b` for interactions."""
        pairs = [f"{a}:{b}" for a, b in itertools.combinations(self.methods, 2)]
        return ["const", *self.methods, *pairs]

    def coefficient(self, term: str) -> float:
        """Fitted coefficient of one term."""
        return float(self.coef[self.terms.index(term)])

    def predict_many(self, points: np.ndarray) -> np.ndarray:
        """Predictions for a (P, n_methods) array of ratios."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return sm.add_constant(_design(points), has_constant="add") @ self.coef

    def predict(self, assignment: Mapping[str, float]) -> float:
        """Prediction at a ratio assignment; unlisted methods are off."""
        unknown = set(assignment) - set(self.methods)
        if unknown:
            raise UnknownNodeError(f"{sorted(unknown)} are not fitted methods")
        point = np.array([[assignment.get(m, 0.0) for m in self.methods]])
        return float(self.predict_many(point)[0])


def fit_response(data: ObservationMatrix, methods: Sequence[str], metric: str) -> ResponseSurface:
    """Least-squares response of `metric` to the ratios of `methods`.

    Args:
        data: Observations.
        methods: Interventional variables.
        metric: Observational variable.

    Returns:
        The fitted surface.

    Raises:
        RankError: The design has collinear columns.
    """
    methods = tuple(methods)
    if not methods:
        raise ConfigError("at least one method is required")
    for m in methods:
        if not data.spec(m).is_interventional:
            raise ConfigError(f"{m!r} is not an interventional variable")
    if data.spec(metric).is_interventional:
        raise ConfigError(f"{metric!r} is not an observational variable")

    design = sm.add_constant(_design(data.columns(methods)), has_constant="add")
    rank = np.linalg.matrix_rank(design)
    if rank < design.shape[1] or design.shape[0] <= design.shape[1]:
        raise RankError(
            f"response design for {metric!r} has rank {rank} with {design.shape[1]} terms and {design.shape[0]} runs"
        )
    fit = sm.OLS(data.column(metric), design).fit()
    return ResponseSurface(methods, metric, np.asarray(fit.params), np.asarray(fit.bse))


def _improvement(spec: SignSpec, baseline: np.ndarray, change: np.ndarray) -> np.ndarray:
    if spec.objective is Objective.MAXIMIZE:
        return change
    if spec.objective is Objective.MINIMIZE:
        return -change
    return np.abs(baseline - spec.target) - np.abs(baseline + change - spec.target)


class PlanEvaluator:
    """Scores ratio assignments against an objective."""

    def __init__(
        self,
        surfaces: Mapping[str, ResponseSurface],
        objective: SelectionObjective,
        scales: Mapping[str, float],
    ) -> None:
        self.surfaces = dict(surfaces)
        self.objective = objective
        self.scales = dict(scales)
        self.methods = next(iter(self.surfaces.values())).methods
        zero = np.zeros((1, len(self.methods)))
        self.baseline = {m: float(s.predict_many(zero)[0]) for m, s in self.surfaces.items()}

    def changes_many(self, points: np.ndarray) -> dict[str, np.ndarray]:
        """Predicted metric changes from baseline at each point."""
        return {m: s.predict_many(points) - self.baseline[m] for m, s in self.surfaces.items()}

    def values(self, points: np.ndarray) -> np.ndarray:
        """Objective value of each row of a (P, n_methods) ratio array."""
        changes = self.changes_many(points)
        total = np.zeros(len(np.atleast_2d(points)))
        for term in self.objective.terms:
            gain = _improvement(term.sign, self.baseline[term.metric], changes[term.metric])
            total += term.weight * gain / self.scales[term.metric]
        return total

    def _point(self, assignment: Mapping[str, float]) -> np.ndarray:
        unknown = set(assignment) - set(self.methods)
        if unknown:
            raise UnknownNodeError(f"{sorted(unknown)} are not searched methods")
        return np.array([[assignment.get(m, 0.0) for m in self.methods]])

    def value(self, assignment: Mapping[str, float]) -> float:
        """Objective value of one assignment."""
        return float(self.values(self._point(assignment))[0])

    def changes(self, assignment: Mapping[str, float]) -> dict[str, float]:
        """Predicted metric changes of one assignment."""
        return {m: float(c[0]) for m, c in self.changes_many(self._point(assignment)).items()}


@dataclass(frozen=True)
class SelectionPlan:
    """Method ratios with their predicted metric changes."""

    assignments: dict[str, float]
    predicted_changes: dict[str, float]
    objective_value: float

    @property
    def active(self) -> list[str]:
        """Methods switched on, sorted."""
        return sorted(m for m, r in self.assignments.items() if r > 0)

    def to_dict(self) -> dict[str, Any]:
        """JSON document for the `select` subcommand."""
        return {
            "assignments": dict(self.assignments),
            "predicted_changes": dict(self.predicted_changes),
            "objective_value": self.objective_value,
        }


def grid_levels(grid_step: float) -> list[float]:
    """Nonzero multiples of `grid_step` in (0, 1]."""
    if not 0 < grid_step <= 0.5:
        raise ConfigError(f"grid step must lie in (0, 0.5], got {grid_step}")
    count = int(math.floor(1.0 / grid_step + 1e-9))
    return [round(k * grid_step, 12) for k in range(1, count + 1)]


def candidate_points(n_methods: int, levels: Sequence[float], max_active: int) -> np.ndarray:
    """All assignments with at most `max_active` methods on.

    Rows come ordered by number of active methods, then method subset, then
    ratios, so the first best row honors the tie-break.
    """
    rows = [np.zeros(n_methods)]
    for size in range(1, min(max_active, n_methods) + 1):
        for subset in itertools.combinations(range(n_methods), size):
            for ratios in itertools.product(levels, repeat=size):
                row = np.zeros(n_methods)
                row[list(subset)] = ratios
                rows.append(row)
    return np.array(rows)


def default_scales(data: ObservationMatrix, metrics: Sequence[str]) -> dict[str, float]:
    """Sample standard deviation of each metric over all runs; constant metrics scale by 1."""
    scales = {}
    for metric in metrics:
        std = float(np.std(data.column(metric), ddof=1))
        scales[metric] = std if std > 0 else 1.0
    return scales


def select_methods(
    data: ObservationMatrix,
    g: CausalGraph,
    objective: SelectionObjective,
    methods: Sequence[str],
    grid_step: float = GRID_STEP,
    max_active: int = MAX_ACTIVE,
    cfg: DmlConfig = DmlConfig(),
) -> SelectionPlan:
    """Best predicted plan over the ratio grid.

    Args:
        data: Observations of methods and metrics.
        g: Causal graph; methods with no path to an objective metric stay off.
        objective: Weighted metric terms.
        methods: Interventional variables to choose from.
        grid_step: Spacing of ratio levels.
        max_active: Most methods switched on at once.
        cfg: Only `n_jobs` is used, to fit the response surfaces concurrently.

    Returns:
        The plan with the largest objective value. Ties go to fewer active
        methods, then to the lexicographically first assignment.
    """
    levels = grid_levels(grid_step)
    if max_active < 1:
        raise ConfigError(f"max_active must be >= 1, got {max_active}")
    for name in (*methods, *objective.metrics):
        if name not in g:
            raise UnknownNodeError(f"unknown node {name!r}")

    methods = sorted(set(methods))
    searched = [m for m in methods if any(is_cause(g, m, metric) for metric in objective.metrics)]
    skipped = sorted(set(methods) - set(searched))
    if skipped:
        logger.info("Skipping %s: no path to any objective metric", ", ".join(skipped))
    if not searched:
        return SelectionPlan(
            assignments={m: 0.0 for m in methods},
            predicted_changes={metric: 0.0 for metric in objective.metrics},
            objective_value=0.0,
        )

    def fit(metric: str) -> ResponseSurface:
        return fit_response(data, searched, metric)

    if cfg.n_jobs > 1:
        with ThreadPoolExecutor(max_workers=cfg.n_jobs) as pool:
            surfaces = dict(zip(objective.metrics, pool.map(fit, objective.metrics)))
    else:
        surfaces = {metric: fit(metric) for metric in objective.metrics}
    scales = {**default_scales(data, objective.metrics), **(objective.scales or {})}
    evaluator = PlanEvaluator(surfaces, objective, scales)

    points = candidate_points(len(searched), levels, max_active)
    values = evaluator.values(points)
    best = int(np.argmax(values))
    logger.info("Evaluated %d candidate plans over %d methods", len(points), len(searched))

    assignment = {m: float(r) for m, r in zip(searched, points[best])}
    return SelectionPlan(
        assignments={m: assignment.get(m, 0.0) for m in methods},
        predicted_changes=evaluator.changes(assignment),
        objective_value=float(values[best]),
    )


def objective_from_dict(doc: Mapping[str, Any], specs: Sequence[VariableSpec]) -> SelectionObjective:
    """Build an objective whose sign specs come from the study declarations."""
    by_name = {s.name: s for s in specs}
    try:
        raw_terms = doc["terms"]
        terms = []
        for raw in raw_terms:
            metric = raw["metric"]
            if metric not in by_name:
                raise UnknownNodeError(f"objective metric {metric!r} is not declared")
            if by_name[metric].is_interventional:
                raise ConfigError(f"objective metric {metric!r} is an interventional variable")
            terms.append(ObjectiveTerm(metric, float(raw["weight"]), by_name[metric].sign))
    except (KeyError, TypeError, ValueError) as e:
        raise SchemaError(f"malformed objective: {e}") from e
    scales = doc.get("scales")
    return SelectionObjective(tuple(terms), None if scales is None else {k: float(v) for k, v in scales.items()})


def load_objective(path: Union[str, Path], specs: Sequence[VariableSpec]) -> SelectionObjective:
    """Read an objective file; metric signs default to the study's."""
    source = str(path)
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise IoError(f"cannot read objective: {e.strerror or e}", source=source) from e
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e}", source=source) from e
    try:
        return objective_from_dict(doc, specs)
    except (SchemaError, ConfigError, UnknownNodeError) as e:
        raise type(e)(e.message, source=source) from e
