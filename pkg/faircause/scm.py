"""Synthetic structural causal models with known ground truth.

Interventional nodes are Uniform[0, 1] roots, standing in for the ratio at
which a fairness-improving method is applied. Every observational node is a
weighted sum of its parents, optionally squashed by `scale * tanh(.)`, plus
Gaussian noise. Linear models have an exact ATE oracle (sum over directed
paths of the product of edge weights); nonlinear ones are evaluated by
Monte-Carlo do-sampling.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional

import numpy as np

from faircause.core import (
    AteQuery, CausalGraph, ObservationMatrix, SignSpec, VariableKind, VariableSpec,
    build_graph, topological_order,
)
from faircause.exceptions import ConfigError, SchemaError, UnknownNodeError
from faircause.formatters import canonical_json
from faircause.settings import MONTE_CARLO_DRAWS

logger = logging.getLogger(__name__)

WeightedEdges = Mapping[tuple[str, str], float]


@dataclass(frozen=True)
class ScmConfig:
    """Parameters of `random_scm`."""

    n_nodes: int
    n_interventional: int
    expected_in_degree: float = 2.0
    weight_range: tuple[float, float] = (0.5, 2.0)
    noise_sigma: float = 0.5
    nonlinear: bool = False
    seed: int = 0

    def __post_init__(self) -> None:
        if not 1 <= self.n_interventional < self.n_nodes:
            raise ConfigError(
                f"need 1 <= n_interventional < n_nodes, got {self.n_interventional} and {self.n_nodes}"
            )
        if not 0 <= self.expected_in_degree <= self.n_nodes - 1:
            raise ConfigError(f"expected_in_degree must be in [0, {self.n_nodes - 1}]")
        low, high = self.weight_range
        if not 0 < low <= high or not math.isfinite(high):
            raise ConfigError(f"weight range must satisfy 0 < low <= high, got {self.weight_range}")
        if not self.noise_sigma > 0:
            raise ConfigError(f"noise_sigma must be positive, got {self.noise_sigma}")


@dataclass(frozen=True)
class Mechanism:
    """Weighted parents of one observational node."""

    parents: tuple[str, ...]
    weights: tuple[float, ...]

    def linear(self, values: Mapping[str, np.ndarray], n: int) -> np.ndarray:
        """Weighted parent sum."""
        total = np.zeros(n)
        for parent, weight in zip(self.parents, self.weights):
            total += weight * values[parent]
        return total


@dataclass(frozen=True, eq=False)
class Scm:
    """A structural causal model over a validated causal graph."""

    graph: CausalGraph
    mechanisms: Mapping[str, Mechanism]
    noise_sigma: float
    nonlinear: bool = False
    scale: float = 1.0
    seed: int = 0
    _order: tuple[str, ...] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if not self.noise_sigma > 0:
            raise ConfigError(f"noise_sigma must be positive, got {self.noise_sigma}")
        for node in self.graph.nodes:
            if self.graph.is_interventional(node):
                if node in self.mechanisms:
                    raise ConfigError(f"interventional node {node!r} cannot have a mechanism")
                continue
            mech = self.mechanisms.get(node)
            if mech is None:
                raise ConfigError(f"observational node {node!r} has no mechanism")
            if sorted(mech.parents) != self.graph.parents(node):
                raise ConfigError(f"mechanism parents of {node!r} differ from the graph")
            if len(mech.weights) != len(mech.parents) or not all(map(math.isfinite, mech.weights)):
                raise ConfigError(f"mechanism weights of {node!r} must be finite, one per parent")
        object.__setattr__(self, "_order", tuple(topological_order(self.graph)))

    def specs(self) -> list[VariableSpec]:
        """Variable declarations: interventional roots and maximized observations."""
        return [
            VariableSpec(
                name,
                VariableKind.INTERVENTIONAL if self.graph.is_interventional(name) else VariableKind.OBSERVATIONAL,
                SignSpec.maximize(),
            )
            for name in self.graph.nodes
        ]

    def weight(self, u: str, v: str) -> float:
        """Weight of edge u->v (0 when absent)."""
        mech = self.mechanisms.get(v)
        if mech is None or u not in mech.parents:
            return 0.0
        return mech.weights[mech.parents.index(u)]

    def to_dict(self) -> dict[str, Any]:
        """JSON representation; identical models serialize identically."""
        return {
            "graph": {
                **self.graph.to_dict(),
                "interventional": sorted(self.graph.interventional),
            },
            "mechanisms": {
                node: {"parents": list(m.parents), "weights": list(m.weights)}
                for node, m in sorted(self.mechanisms.items())
            },
            "noise_sigma": self.noise_sigma,
            "nonlinear": self.nonlinear,
            "scale": self.scale,
            "seed": self.seed,
        }

    def to_json(self) -> str:
        """Canonical JSON text."""
        return canonical_json(self.to_dict())


def scm_from_dict(doc: Mapping[str, Any]) -> Scm:
    """Inverse of `Scm.to_dict`."""
    try:
        graph_doc = doc["graph"]
        interventional = set(graph_doc.get("interventional", []))
        specs = [
            VariableSpec(n, VariableKind.INTERVENTIONAL if n in interventional else VariableKind.OBSERVATIONAL)
            for n in graph_doc["nodes"]
        ]
        graph = build_graph(specs, [tuple(e) for e in graph_doc["edges"]])
        mechanisms = {
            node: Mechanism(tuple(m["parents"]), tuple(float(w) for w in m["weights"]))
            for node, m in doc["mechanisms"].items()
        }
        return Scm(
            graph=graph,
            mechanisms=mechanisms,
            noise_sigma=float(doc["noise_sigma"]),
            nonlinear=bool(doc.get("nonlinear", False)),
            scale=float(doc.get("scale", 1.0)),
            seed=int(doc.get("seed", 0)),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise SchemaError(f"malformed SCM document: {e}") from e


def make_scm(
    nodes: list[str],
    interventional: list[str],
    edges: WeightedEdges,
    noise_sigma: float = 0.5,
    nonlinear: bool = False,
    scale: float = 1.0,
    seed: int = 0,
) -> Scm:
    """Build a hand-specified model.

    Args:
        nodes: All variable names, in column order.
        interventional: Names of the Uniform[0, 1] roots.
        edges: Weight of every (from, to) edge.
        noise_sigma: Standard deviation of the additive noise.
        nonlinear: Apply `scale * tanh(.)` to weighted parent sums.
        scale: Output scale of the nonlinearity.
        seed: Default seed of the Monte-Carlo oracle.

    Returns:
        The model.
    """
    kinds = set(interventional)
    unknown = kinds - set(nodes)
    if unknown:
        raise UnknownNodeError(f"unknown interventional nodes: {', '.join(sorted(unknown))}")
    specs = [
        VariableSpec(n, VariableKind.INTERVENTIONAL if n in kinds else VariableKind.OBSERVATIONAL)
        for n in nodes
    ]
    graph = build_graph(specs, edges.keys())
    mechanisms = {}
    for node in nodes:
        if node in kinds:
            continue
        parents = tuple(graph.parents(node))
        mechanisms[node] = Mechanism(parents, tuple(float(edges[(p, node)]) for p in parents))
    return Scm(graph, mechanisms, noise_sigma, nonlinear=nonlinear, scale=scale, seed=seed)


def random_scm(cfg: ScmConfig) -> Scm:
    """Draw a random model.

    Interventional nodes come first in a random causal order; each ordered
    pair (i < j) receives an edge with probability
    expected_in_degree / (n_nodes - 1) unless it would end at an
    interventional node. Weights are ±Uniform(weight_range).
    """
    rng = np.random.default_rng(cfg.seed)
    n_obs = cfg.n_nodes - cfg.n_interventional
    treatments = [f"T{i + 1}" for i in range(cfg.n_interventional)]
    observed = [f"X{i + 1}" for i in range(n_obs)]
    order = [treatments[i] for i in rng.permutation(cfg.n_interventional)] + \
        [observed[i] for i in rng.permutation(n_obs)]

    p = cfg.expected_in_degree / (cfg.n_nodes - 1)
    low, high = cfg.weight_range
    edges: dict[tuple[str, str], float] = {}
    for i, j in ((i, j) for j in range(cfg.n_nodes) for i in range(j)):
        u, v = order[i], order[j]
        if v in treatments:
            continue
        if rng.random() < p:
            magnitude = rng.uniform(low, high)
            edges[(u, v)] = float(magnitude if rng.random() < 0.5 else -magnitude)

    scm = make_scm(
        treatments + observed, treatments, edges,
        noise_sigma=cfg.noise_sigma, nonlinear=cfg.nonlinear, seed=cfg.seed,
    )
    logger.debug("Drew SCM with %d nodes and %d edges (seed %d)", cfg.n_nodes, len(edges), cfg.seed)
    return scm


def _simulate(scm: Scm, assignments: Mapping[str, float], n: int, seed: int) -> dict[str, np.ndarray]:
    # Every node draws its variates in the same order whether clamped or not,
    # so arms with the same seed share common random numbers.
    rng = np.random.default_rng(seed)
    values: dict[str, np.ndarray] = {}
    for node in scm._order:
        if scm.graph.is_interventional(node):
            draw = rng.uniform(0.0, 1.0, n)
        else:
            draw = rng.normal(0.0, scm.noise_sigma, n)
        if node in assignments:
            values[node] = np.full(n, float(assignments[node]))
        elif scm.graph.is_interventional(node):
            values[node] = draw
        else:
            signal = scm.mechanisms[node].linear(values, n)
            if scm.nonlinear:
                signal = scm.scale * np.tanh(signal)
            values[node] = signal + draw
    return values


def do_sample(scm: Scm, assignments: Mapping[str, float], n: int, seed: int) -> ObservationMatrix:
    """Sample under do(assignments): clamped nodes ignore their mechanisms."""
    if n < 2:
        raise ConfigError(f"n must be >= 2 (an observation matrix holds at least two runs), got {n}")
    for name in assignments:
        if name not in scm.graph:
            raise UnknownNodeError(f"unknown node {name!r}")
    values = _simulate(scm, assignments, n, seed)
    data = np.column_stack([values[name] for name in scm.graph.nodes])
    return ObservationMatrix(tuple(scm.specs()), data)


def sample(scm: Scm, n: int, seed: int) -> ObservationMatrix:
    """Draw `n` i.i.d. observational runs."""
    return do_sample(scm, {}, n, seed)


def _mean_under(scm: Scm, node: str, assignments: Mapping[str, float], n: int, seed: int) -> float:
    return float(_simulate(scm, assignments, n, seed)[node].mean())


def total_effect(scm: Scm, treatment: str, outcome: str) -> float:
    """Sum over directed paths of the product of edge weights (linear models)."""
    for name in (treatment, outcome):
        if name not in scm.graph:
            raise UnknownNodeError(f"unknown node {name!r}")
    effect = {node: 0.0 for node in scm.graph.nodes}
    effect[treatment] = 1.0
    for node in scm._order:
        if node == treatment or node not in scm.mechanisms:
            continue
        mech = scm.mechanisms[node]
        effect[node] = sum(w * effect[p] for p, w in zip(mech.parents, mech.weights))
    return effect[outcome]


def true_ate(
    scm: Scm,
    q: AteQuery,
    n_mc: int = MONTE_CARLO_DRAWS,
    seed: Optional[int] = None,
    monte_carlo: bool = False,
) -> float:
    """Ground-truth E[Y|do(X=x1)] - E[Y|do(X=x2)].

    Args:
        scm: The model.
        q: Treatment, outcome and the two arms.
        n_mc: Draws per arm for the Monte-Carlo oracle.
        seed: Seed of the Monte-Carlo arms; defaults to the model seed.
        monte_carlo: Use Monte-Carlo even for linear models.

    Returns:
        The average treatment effect.
    """
    for name in (q.treatment, q.outcome):
        if name not in scm.graph:
            raise UnknownNodeError(f"unknown node {name!r}")
    if q.x1 == q.x2:
        return 0.0
    if not scm.nonlinear and not monte_carlo:
        return total_effect(scm, q.treatment, q.outcome) * (q.x1 - q.x2)

    seed = scm.seed if seed is None else seed
    high = _mean_under(scm, q.outcome, {q.treatment: q.x1}, n_mc, seed)
    low = _mean_under(scm, q.outcome, {q.treatment: q.x2}, n_mc, seed)
    return high - low
