"""Graph overlap and accuracy against a reference graph."""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Any, Sequence

from faircause.core import CausalGraph
from faircause.exceptions import ConfigError, NodeSetMismatchError


@dataclass(frozen=True)
class OverlapReport:
    """Shared directed edges of two graphs; Jaccard is over the edge union."""

    intersection: int
    edges_1: int
    edges_2: int
    jaccard: float

    def to_dict(self) -> dict[str, Any]:
        """JSON document."""
        return asdict(self)


@dataclass(frozen=True)
class GraphAccuracy:
    """Errors of a learned graph against the truth."""

    false_edge_rate: float
    missing_edge_rate: float
    shd: int
    skeleton_precision: float
    skeleton_recall: float
    skeleton_f1: float

    def to_dict(self) -> dict[str, Any]:
        """JSON document."""
        return asdict(self)


def _check_nodes(g1: CausalGraph, g2: CausalGraph) -> None:
    if set(g1.nodes) != set(g2.nodes):
        only = sorted(set(g1.nodes) ^ set(g2.nodes))
        raise NodeSetMismatchError(f"graphs have different nodes: {', '.join(only)}")


def _skeleton(g: CausalGraph) -> set[frozenset[str]]:
    return {frozenset(e) for e in g.edges}


def compare_graphs(g1: CausalGraph, g2: CausalGraph) -> OverlapReport:
    """Overlap of the directed edge sets of two graphs over the same nodes."""
    _check_nodes(g1, g2)
    shared = len(g1.edges & g2.edges)
    union = len(g1.edges | g2.edges)
    return OverlapReport(
        intersection=shared,
        edges_1=len(g1.edges),
        edges_2=len(g2.edges),
        jaccard=1.0 if union == 0 else shared / union,
    )


def structural_hamming_distance(learned: CausalGraph, truth: CausalGraph) -> int:
    """Edge additions, deletions and reversals turning `learned` into `truth`."""
    _check_nodes(learned, truth)
    distance = 0
    for pair in _skeleton(learned) | _skeleton(truth):
        u, v = sorted(pair)
        if (learned.has_edge(u, v), learned.has_edge(v, u)) != (truth.has_edge(u, v), truth.has_edge(v, u)):
            distance += 1
    return distance


def eval_against_truth(learned: CausalGraph, truth: CausalGraph) -> GraphAccuracy:
    """Edge error rates, SHD and skeleton precision/recall/F1."""
    _check_nodes(learned, truth)
    wrong = len(learned.edges - truth.edges)
    absent = len(truth.edges - learned.edges)

    skel_l, skel_t = _skeleton(learned), _skeleton(truth)
    hits = len(skel_l & skel_t)
    precision = hits / len(skel_l) if skel_l else 1.0
    recall = hits / len(skel_t) if skel_t else 1.0
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)

    return GraphAccuracy(
        false_edge_rate=wrong / len(learned.edges) if learned.edges else 0.0,
        missing_edge_rate=absent / len(truth.edges) if truth.edges else 0.0,
        shd=structural_hamming_distance(learned, truth),
        skeleton_precision=precision,
        skeleton_recall=recall,
        skeleton_f1=f1,
    )


@dataclass(frozen=True)
class ConsensusReport:
    """Edges found in every one of k graphs, with their pairwise Jaccard overlaps."""

    n_graphs: int
    edges: tuple[tuple[str, str], ...]
    mean_edges: float
    jaccard: tuple[tuple[float, ...], ...]

    def to_dict(self) -> dict[str, Any]:
        """JSON document."""
        return {
            "n_graphs": self.n_graphs,
            "edges": [list(e) for e in self.edges],
            "count": len(self.edges),
            "mean_edges": self.mean_edges,
            "jaccard": [list(row) for row in self.jaccard],
        }


def consensus_edges(graphs: Sequence[CausalGraph]) -> ConsensusReport:
    """Directed edges shared by all graphs, in sorted order.

    Args:
        graphs: At least two graphs over the same nodes, e.g. learned from
            different seeds or run tables.

    Returns:
        The consensus edges, the mean edge count and the symmetric matrix of
        pairwise Jaccard overlaps in input order.
    """
    if len(graphs) < 2:
        raise ConfigError(f"a consensus needs at least 2 graphs, got {len(graphs)}")
    for g in graphs[1:]:
        _check_nodes(graphs[0], g)
    shared = frozenset.intersection(*(g.edges for g in graphs))
    return ConsensusReport(
        n_graphs=len(graphs),
        edges=tuple(sorted(shared)),
        mean_edges=sum(len(g.edges) for g in graphs) / len(graphs),
        jaccard=tuple(tuple(compare_graphs(a, b).jaccard for b in graphs) for a in graphs),
    )
