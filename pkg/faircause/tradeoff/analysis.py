"""Detecting trade-offs of a fairness method and locating their causes.

A method triggers a trade-off between two metrics when its average effects on
them have strictly opposite signs. The candidate causes are the metrics
themselves, when one causes the other in the graph, and their common
ancestors. A candidate is a cause when the effects it induces on both metrics,
evaluated at the values the method moves it between, also oppose.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Any, Optional, Sequence

from faircause.core import (
    AteQuery, CausalGraph, ObservationMatrix, VariableSpec, common_ancestors, is_cause,
)
from faircause.exceptions import ConfigError, DegenerateTreatmentError, UnknownNodeError
from faircause.inference import DmlConfig, ate, conditional_mean

from .sign import Sign, sign

logger = logging.getLogger(__name__)


class Role(str, Enum):
    """Why a node was a candidate cause."""

    SELF_X = "self_x"
    SELF_Y = "self_y"
    COMMON_ANCESTOR = "common_ancestor"


@dataclass(frozen=True)
class TradeoffQuery:
    """Does `method` trade metric `x` against metric `y`, and why?"""

    method: str
    x: str
    y: str
    t_on: float = 1.0
    t_off: float = 0.0

    def __post_init__(self) -> None:
        if self.x == self.y:
            raise ConfigError(f"metric pair uses {self.x!r} twice")
        if self.method in (self.x, self.y):
            raise ConfigError(f"method {self.method!r} cannot also be a metric")
        for value in (self.t_on, self.t_off):
            if not (math.isfinite(value) and 0.0 <= value <= 1.0):
                raise ConfigError(f"method ratios must lie in [0, 1], got {value}")
        if self.t_on == self.t_off:
            raise ConfigError("t_on and t_off must differ")

    @property
    def pair(self) -> tuple[str, str]:
        """The two metrics, in query order."""
        return self.x, self.y

    def swapped(self) -> TradeoffQuery:
        """The same query with the metrics exchanged."""
        return TradeoffQuery(self.method, self.y, self.x, self.t_on, self.t_off)


@dataclass(frozen=True)
class Detection:
    """Effects of the method on both metrics and their signs."""

    ate_x: float
    ate_y: float
    x_off: float
    y_off: float
    sign_x: Sign
    sign_y: Sign

    @property
    def tradeoff(self) -> bool:
        """Whether the two metrics moved in opposite directions."""
        return self.sign_x.opposes(self.sign_y)


@dataclass(frozen=True)
class CauseEvidence:
    """A node whose induced effects on the two metrics oppose."""

    node: str
    role: Role
    ate_on_x: float
    ate_on_y: float
    sign_x: Sign
    sign_y: Sign

    def to_dict(self) -> dict[str, Any]:
        """JSON document."""
        return {
            "node": self.node,
            "role": self.role.value,
            "ate_on_x": self.ate_on_x,
            "ate_on_y": self.ate_on_y,
            "sign_x": self.sign_x.value,
            "sign_y": self.sign_y.value,
        }


@dataclass(frozen=True)
class TradeoffAnalysis:
    """Outcome of analyzing one query.

    `detection` is always measured; `detected` is False when the method does
    not trigger a trade-off, in which case `causes` is empty. `inconclusive`
    names candidates whose effects could not be estimated.
    """

    query: TradeoffQuery
    detection: Detection
    causes: tuple[CauseEvidence, ...] = ()
    inconclusive: tuple[str, ...] = ()

    @property
    def detected(self) -> bool:
        """Whether the method triggered a trade-off."""
        return self.detection.tradeoff

    @property
    def cause_nodes(self) -> list[str]:
        """Names of the identified causes."""
        return [c.node for c in self.causes]


def _spec_map(data: ObservationMatrix, specs: Optional[Sequence[VariableSpec]]) -> dict[str, VariableSpec]:
    return {s.name: s for s in (data.variables if specs is None else specs)}


def _check_query(
    data: ObservationMatrix, g: CausalGraph, q: TradeoffQuery, by_name: dict[str, VariableSpec]
) -> None:
    for name in (q.method, q.x, q.y):
        data.index(name)
        if name not in g or name not in by_name:
            raise UnknownNodeError(f"unknown node {name!r}")
    if not (by_name[q.method].is_interventional and g.is_interventional(q.method)):
        raise ConfigError(f"method {q.method!r} is not an interventional variable")
    for name in (q.x, q.y):
        if by_name[name].is_interventional:
            raise ConfigError(f"metric {name!r} is an interventional variable")


def _method_effect(data: ObservationMatrix, var: str, q: TradeoffQuery, cfg: DmlConfig) -> tuple[float, float]:
    """(value at t_off, change from t_off to t_on) of `var` under the method."""
    off = conditional_mean(data, var, q.method, q.t_off, cfg)
    on = conditional_mean(data, var, q.method, q.t_on, cfg)
    return off, on - off


def measure(
    data: ObservationMatrix,
    g: CausalGraph,
    q: TradeoffQuery,
    specs: Optional[Sequence[VariableSpec]] = None,
    cfg: DmlConfig = DmlConfig(),
) -> Detection:
    """Effects of the method on both metrics, whether or not they oppose."""
    by_name = _spec_map(data, specs)
    _check_query(data, g, q, by_name)
    x_off, ate_x = _method_effect(data, q.x, q, cfg)
    y_off, ate_y = _method_effect(data, q.y, q, cfg)
    return Detection(
        ate_x=ate_x,
        ate_y=ate_y,
        x_off=x_off,
        y_off=y_off,
        sign_x=sign(by_name[q.x].sign, x_off, ate_x),
        sign_y=sign(by_name[q.y].sign, y_off, ate_y),
    )


def detect_tradeoff(
    data: ObservationMatrix,
    g: CausalGraph,
    q: TradeoffQuery,
    specs: Optional[Sequence[VariableSpec]] = None,
    cfg: DmlConfig = DmlConfig(),
) -> Optional[Detection]:
    """The detection record if the method triggers a trade-off, else None."""
    detection = measure(data, g, q, specs, cfg)
    return detection if detection.tradeoff else None


def analyze(
    data: ObservationMatrix,
    g: CausalGraph,
    q: TradeoffQuery,
    specs: Optional[Sequence[VariableSpec]] = None,
    cfg: DmlConfig = DmlConfig(),
) -> TradeoffAnalysis:
    """Find the causes of the trade-off a method triggers between two metrics.

    Args:
        data: Observations of methods and metrics.
        g: Causal graph over the same variables.
        q: Method and metric pair.
        specs: Variable declarations; default to those of `data`.
        cfg: Estimation options for effects.

    Returns:
        The analysis. Causes are ordered self_x, self_y, then common ancestors
        by name.
    """
    by_name = _spec_map(data, specs)
    detection = measure(data, g, q, specs, cfg)
    if not detection.tradeoff:
        logger.debug("%s does not trade %s against %s", q.method, q.x, q.y)
        return TradeoffAnalysis(q, detection)
    logger.info(
        "%s trades %s (%+.4g) against %s (%+.4g)", q.method, q.x, detection.ate_x, q.y, detection.ate_y
    )
    spec_x, spec_y = by_name[q.x].sign, by_name[q.y].sign

    causes: list[CauseEvidence] = []
    inconclusive: list[str] = []

    def effects(node: str, on: float, off: float) -> tuple[float, float]:
        on_x = 0.0 if node == q.x else ate(data, g, AteQuery(node, q.x, on, off), cfg)
        on_y = 0.0 if node == q.y else ate(data, g, AteQuery(node, q.y, on, off), cfg)
        return on_x, on_y

    def consider(node: str, role: Role, on: float, off: float) -> None:
        try:
            on_x, on_y = effects(node, on, off)
        except DegenerateTreatmentError as e:
            logger.warning("%s is inconclusive as a cause of %s/%s: %s", node, q.x, q.y, e)
            inconclusive.append(node)
            return
        if role is Role.SELF_X:
            on_x = detection.ate_x
        elif role is Role.SELF_Y:
            on_y = detection.ate_y
        sx = sign(spec_x, detection.x_off, on_x)
        sy = sign(spec_y, detection.y_off, on_y)
        if sx.opposes(sy):
            causes.append(CauseEvidence(node, role, on_x, on_y, sx, sy))

    if is_cause(g, q.x, q.y):
        consider(q.x, Role.SELF_X, detection.x_off + detection.ate_x, detection.x_off)
    elif is_cause(g, q.y, q.x):
        consider(q.y, Role.SELF_Y, detection.y_off + detection.ate_y, detection.y_off)

    for node in common_ancestors(g, q.x, q.y):
        # Exogenous nodes and nodes the method cannot reach do not carry its effect.
        if g.is_interventional(node) or not is_cause(g, q.method, node):
            continue
        off, change = _method_effect(data, node, q, cfg)
        consider(node, Role.COMMON_ANCESTOR, off + change, off)

    return TradeoffAnalysis(q, detection, tuple(causes), tuple(inconclusive))


def analyze_all(
    data: ObservationMatrix,
    g: CausalGraph,
    queries: Sequence[TradeoffQuery],
    specs: Optional[Sequence[VariableSpec]] = None,
    cfg: DmlConfig = DmlConfig(),
) -> list[TradeoffAnalysis]:
    """Analyze independent queries, on `cfg.n_jobs` threads, in input order."""
    if cfg.n_jobs > 1 and len(queries) > 1:
        with ThreadPoolExecutor(max_workers=cfg.n_jobs) as pool:
            return list(pool.map(lambda q: analyze(data, g, q, specs, cfg), queries))
    return [analyze(data, g, q, specs, cfg) for q in queries]
