"""Greedy hill-climbing over DAGs with random restarts.

Moves are edge additions, deletions and reversals; each step takes the move
with the largest score gain and the climb stops at a local optimum. Edges never
enter interventional nodes, in-degrees are capped, and tier constraints
optionally forbid edges pointing back in the pipeline.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import networkx as nx
import numpy as np

from faircause.core import CausalGraph, ObservationMatrix, VariableSpec, build_graph
from faircause.exceptions import ConfigError, SchemaError, UnknownNodeError
from faircause.settings import MAX_IN_DEGREE, RANDOM_DAG_EDGE_PROB, SEARCH_RESTARTS

from .bge import BgeHyper, BgeScorer

logger = logging.getLogger(__name__)

# Smallest score gain accepted as an improvement.
MIN_GAIN = 1e-9


@dataclass(frozen=True)
class SearchConfig:
    """Hill-climbing options.

    Variables in `excluded` stay isolated: no edge enters or leaves them.
    """

    restarts: int = SEARCH_RESTARTS
    max_in_degree: Optional[int] = MAX_IN_DEGREE
    tier_constraints: bool = False
    seed: int = 0
    n_jobs: int = 1
    excluded: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        if self.restarts < 1:
            raise ConfigError(f"restarts must be >= 1, got {self.restarts}")
        if self.max_in_degree is not None and self.max_in_degree < 0:
            raise ConfigError(f"max_in_degree must be >= 0, got {self.max_in_degree}")
        if self.n_jobs < 1:
            raise ConfigError(f"n_jobs must be >= 1, got {self.n_jobs}")


@dataclass(frozen=True)
class _Move:
    gain: float
    kind: str
    u: int
    v: int


class HillClimber:
    """Climbs from a start graph to a local optimum of the BGe score."""

    def __init__(
        self, scorer: BgeScorer, specs: Sequence[VariableSpec], cfg: SearchConfig
    ) -> None:
        self.scorer = scorer
        self.cfg = cfg
        m = len(specs)
        self.m = m
        self.max_in = m if cfg.max_in_degree is None else cfg.max_in_degree
        # Candidate moves are scanned in lexicographic (from, to) name order.
        self.order = sorted(range(m), key=lambda i: specs[i].name)
        self.allowed = np.zeros((m, m), dtype=bool)
        for u, su in enumerate(specs):
            for v, sv in enumerate(specs):
                if u == v or sv.is_interventional:
                    continue
                if su.name in cfg.excluded or sv.name in cfg.excluded:
                    continue
                if cfg.tier_constraints and su.tier is not None and sv.tier is not None:
                    if su.tier.rank > sv.tier.rank:
                        continue
                self.allowed[u, v] = True

    def random_start(self, rng: np.random.Generator) -> list[set[int]]:
        """A random DAG respecting every constraint."""
        parents: list[set[int]] = [set() for _ in range(self.m)]
        perm = rng.permutation(self.m)
        for j in range(self.m):
            for i in range(j):
                u, v = int(perm[i]), int(perm[j])
                draw = rng.random()
                if self.allowed[u, v] and len(parents[v]) < self.max_in and draw < RANDOM_DAG_EDGE_PROB:
                    parents[v].add(u)
        return parents

    def _local(self, v: int, parents: set[int]) -> float:
        return self.scorer.local(v, sorted(parents))

    def climb(self, parents: list[set[int]]) -> tuple[list[set[int]], float]:
        """Apply best moves until no move improves the score."""
        local = [self._local(v, parents[v]) for v in range(self.m)]
        while True:
            move = self._best_move(parents, local)
            if move is None:
                break
            if move.kind == "add":
                parents[move.v].add(move.u)
            elif move.kind == "delete":
                parents[move.v].discard(move.u)
            else:
                parents[move.v].discard(move.u)
                parents[move.u].add(move.v)
                local[move.u] = self._local(move.u, parents[move.u])
            local[move.v] = self._local(move.v, parents[move.v])
        return parents, float(sum(local))

    def _best_move(self, parents: list[set[int]], local: list[float]) -> Optional[_Move]:
        dag = nx.DiGraph()
        dag.add_nodes_from(range(self.m))
        dag.add_edges_from((u, v) for v in range(self.m) for u in parents[v])
        reach = {v: nx.descendants(dag, v) for v in range(self.m)}

        best: Optional[_Move] = None
        for u in self.order:
            for v in self.order:
                if u == v:
                    continue
                if u in parents[v]:
                    gain = self._local(v, parents[v] - {u}) - local[v]
                    if best is None or gain > best.gain:
                        best = _Move(gain, "delete", u, v)
                    if self.allowed[v, u] and len(parents[u]) < self.max_in:
                        gain += self._local(u, parents[u] | {v}) - local[u]
                        if (best is None or gain > best.gain) and not self._other_path(dag, reach, u, v):
                            best = _Move(gain, "reverse", u, v)
                elif self.allowed[u, v] and len(parents[v]) < self.max_in and u not in reach[v]:
                    gain = self._local(v, parents[v] | {u}) - local[v]
                    if best is None or gain > best.gain:
                        best = _Move(gain, "add", u, v)
        if best is None or best.gain <= MIN_GAIN:
            return None
        return best

    @staticmethod
    def _other_path(dag: nx.DiGraph, reach: dict[int, set[int]], u: int, v: int) -> bool:
        """Whether u reaches v without the edge u->v."""
        return any(c == v or v in reach[c] for c in dag.successors(u) if c != v)


def learn_graph(
    data: ObservationMatrix,
    specs: Optional[Sequence[VariableSpec]] = None,
    h: Optional[BgeHyper] = None,
    cfg: Optional[SearchConfig] = None,
) -> CausalGraph:
    """Learn the highest-scoring DAG found across restarts.

    Restart 0 starts from the empty graph, later restarts from random
    constraint-respecting DAGs. Restarts may run on `cfg.n_jobs` threads; the
    winner is chosen in restart order, so the result only depends on the seed.

    Args:
        data: Observations.
        specs: Variable declarations; default to those of `data`.
        h: BGe hyperparameters.
        cfg: Search options.

    Returns:
        The learned graph.
    """
    cfg = cfg or SearchConfig()
    if specs is None:
        specs = data.variables
    by_name = {s.name: s for s in specs}
    if set(by_name) != set(data.names):
        raise SchemaError("variable declarations do not match the data columns")
    unknown = sorted(set(cfg.excluded) - set(by_name))
    if unknown:
        raise UnknownNodeError(f"cannot exclude unknown variables: {', '.join(unknown)}")
    ordered = [by_name[n] for n in data.names]

    scorer = BgeScorer(data, h)
    climber = HillClimber(scorer, ordered, cfg)
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.restarts)

    def restart(i: int) -> tuple[list[set[int]], float]:
        if i == 0:
            start: list[set[int]] = [set() for _ in ordered]
        else:
            start = climber.random_start(np.random.default_rng(seeds[i]))
        parents, score = climber.climb(start)
        logger.info(
            "Restart %d: score %.4f with %d edges", i, score, sum(len(p) for p in parents)
        )
        return parents, score

    if cfg.n_jobs > 1:
        with ThreadPoolExecutor(max_workers=cfg.n_jobs) as pool:
            results = list(pool.map(restart, range(cfg.restarts)))
    else:
        results = [restart(i) for i in range(cfg.restarts)]

    best_index = max(range(len(results)), key=lambda i: (results[i][1], -i))
    parents = results[best_index][0]
    edges = [(data.names[u], data.names[v]) for v in range(len(ordered)) for u in parents[v]]
    return build_graph(ordered, edges)
