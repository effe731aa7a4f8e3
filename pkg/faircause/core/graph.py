"""Causal graphs over study variables."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence, Union

import networkx as nx

from faircause.exceptions import (
    CycleError, ExogeneityError, ParseError, SchemaError, UnknownNodeError,
)

from .variables import VariableLike, VariableSpec, as_specs

Edge = tuple[str, str]


@dataclass(frozen=True)
class CausalGraph:
    """Directed acyclic graph whose nodes are variable names.

    Construction validates the invariants, so every instance is acyclic and has
    no edge into an interventional node. Use `build_graph` rather than calling
    the constructor with unchecked input.
    """

    nodes: tuple[str, ...]
    edges: frozenset[Edge]
    interventional: frozenset[str] = frozenset()
    _dag: nx.DiGraph = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        known = set(self.nodes)
        if len(known) != len(self.nodes):
            raise SchemaError("node names must be unique")
        for name in self.interventional:
            if name not in known:
                raise UnknownNodeError(f"unknown node {name!r}")
        for u, v in sorted(self.edges):
            for end in (u, v):
                if end not in known:
                    raise UnknownNodeError(f"edge {u}->{v} references unknown node {end!r}")
            if v in self.interventional:
                raise ExogeneityError(f"edge {u}->{v} targets interventional node {v!r}")

        dag = nx.DiGraph()
        dag.add_nodes_from(self.nodes)
        dag.add_edges_from(self.edges)
        if not nx.is_directed_acyclic_graph(dag):
            cycle = nx.find_cycle(dag)
            path = " -> ".join([u for u, _ in cycle] + [cycle[0][0]])
            raise CycleError(f"edges form a cycle: {path}")
        object.__setattr__(self, "_dag", dag)

    def __contains__(self, node: object) -> bool:
        return node in self._dag

    def _check(self, *names: str) -> None:
        for name in names:
            if name not in self._dag:
                raise UnknownNodeError(f"unknown node {name!r}")

    def is_interventional(self, node: str) -> bool:
        """Whether `node` is an interventional variable."""
        self._check(node)
        return node in self.interventional

    def has_edge(self, u: str, v: str) -> bool:
        """Whether the edge u -> v exists."""
        return (u, v) in self.edges

    def parents(self, node: str) -> list[str]:
        """Sorted direct causes of `node`."""
        self._check(node)
        return sorted(self._dag.predecessors(node))

    def children(self, node: str) -> list[str]:
        """Direct successors, sorted."""
        self._check(node)
        return sorted(self._dag.successors(node))

    def ancestors(self, node: str) -> set[str]:
        """All nodes with a directed path into `node`."""
        self._check(node)
        return set(nx.ancestors(self._dag, node))

    def descendants(self, node: str) -> set[str]:
        """All nodes reachable from `node`."""
        self._check(node)
        return set(nx.descendants(self._dag, node))

    def sorted_edges(self) -> list[Edge]:
        """Edges in lexicographic order."""
        return sorted(self.edges)

    def to_networkx(self) -> nx.DiGraph:
        """A mutable copy of the underlying graph."""
        return self._dag.copy()

    def to_dict(self) -> dict[str, Any]:
        """JSON representation `{"nodes": [...], "edges": [[from, to], ...]}`."""
        return {
            "nodes": list(self.nodes),
            "edges": [list(e) for e in self.sorted_edges()],
        }


def build_graph(nodes: Sequence[VariableLike], edges: Iterable[Edge]) -> CausalGraph:
    """Build and validate a causal graph.

    Args:
        nodes: Variable specs (or bare names, taken as observational).
        edges: Directed (from, to) pairs; duplicates are dropped.

    Returns:
        The validated graph.
    """
    specs = as_specs(nodes)
    return CausalGraph(
        nodes=tuple(s.name for s in specs),
        edges=frozenset((str(u), str(v)) for u, v in edges),
        interventional=frozenset(s.name for s in specs if s.is_interventional),
    )


def is_cause(g: CausalGraph, x: str, y: str) -> bool:
    """Whether a directed path of length >= 1 leads from `x` to `y`."""
    g._check(x, y)
    if x == y:
        return False
    return bool(nx.has_path(g._dag, x, y))


def common_ancestors(g: CausalGraph, x: str, y: str) -> list[str]:
    """Nodes with directed paths to both `x` and `y`, sorted by name."""
    g._check(x, y)
    shared = g.ancestors(x) & g.ancestors(y)
    return sorted(shared - {x, y})


def topological_order(g: CausalGraph) -> list[str]:
    """Topological order with lexicographic tie-breaking."""
    return list(nx.lexicographical_topological_sort(g._dag))


def graph_from_dict(doc: dict[str, Any], specs: Optional[Sequence[VariableSpec]] = None) -> CausalGraph:
    """Parse a graph document.

    Args:
        doc: `{"nodes": [...], "edges": [[from, to], ...]}`.
        specs: Study variables; supplies interventional kinds. The node set must
            match when given.

    Returns:
        The validated graph.
    """
    try:
        names = [str(n) for n in doc["nodes"]]
        edges = [(str(u), str(v)) for u, v in doc["edges"]]
    except (KeyError, TypeError, ValueError) as e:
        raise SchemaError(f"malformed graph document: {e}") from e

    if specs is None:
        return build_graph(names, edges)
    by_name = {s.name: s for s in specs}
    if set(by_name) != set(names):
        raise SchemaError("graph nodes do not match the study variables")
    return build_graph([by_name[n] for n in names], edges)


def load_graph(path: Union[str, Path], specs: Optional[Sequence[VariableSpec]] = None) -> CausalGraph:
    """Read a graph JSON file."""
    source = str(path)
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise ParseError(f"cannot read graph: {e}", source=source) from e
    try:
        return graph_from_dict(doc, specs)
    except SchemaError as e:
        raise SchemaError(e.message, source=source) from e
