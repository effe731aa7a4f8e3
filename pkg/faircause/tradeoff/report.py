"""Aggregating analyses per metric pair into confidence reports."""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Optional, Sequence, Union

from faircause.core import CausalGraph, Tier, VariableSpec
from faircause.exceptions import ConfigError, IoError, MixedPairError, ParseError, SchemaError, UnknownNodeError
from faircause.formatters import atomic_write, canonical_json, graph_to_dot

from .analysis import CauseEvidence, Role, TradeoffAnalysis
from .sign import Sign


class ConfidenceLevel(str, Enum):
    """Display buckets for cause confidence."""

    FULL = "full"
    HIGH = "high"
    MEDIUM = "medium"
    LOW = "low"
    NONE = "none"


def confidence_level(confidence: float) -> ConfidenceLevel:
    """Bucket of a confidence in [0, 1]."""
    if not 0.0 <= confidence <= 1.0:
        raise ConfigError(f"confidence must lie in [0, 1], got {confidence}")
    if confidence == 1.0:
        return ConfidenceLevel.FULL
    if confidence >= 0.7:
        return ConfidenceLevel.HIGH
    if confidence >= 0.3:
        return ConfidenceLevel.MEDIUM
    if confidence > 0.0:
        return ConfidenceLevel.LOW
    return ConfidenceLevel.NONE


@dataclass(frozen=True)
class ConfidenceTable:
    """How often a metric pair trades off and how often each node is blamed."""

    x: str
    y: str
    count: int
    n_methods: int
    confidence: dict[str, float] = field(default_factory=dict)

    def level(self, node: str) -> ConfidenceLevel:
        """Display bucket of a node's confidence."""
        return confidence_level(self.confidence.get(node, 0.0))


def aggregate(analyses: Sequence[TradeoffAnalysis]) -> ConfidenceTable:
    """Count triggering methods and the share of them blaming each node.

    Raises:
        MixedPairError: The analyses cover different metric pairs.
    """
    if not analyses:
        raise ConfigError("no analyses to aggregate")
    pairs = {a.query.pair for a in analyses}
    if len(pairs) > 1:
        raise MixedPairError(f"analyses mix metric pairs {sorted(pairs)}")
    x, y = analyses[0].query.pair

    triggered = [a for a in analyses if a.detected]
    blamed = Counter(node for a in triggered for node in set(a.cause_nodes))
    count = len(triggered)
    return ConfidenceTable(
        x=x,
        y=y,
        count=count,
        n_methods=len(analyses),
        confidence={node: blamed[node] / count for node in sorted(blamed)},
    )


@dataclass(frozen=True)
class MethodEntry:
    """Outcome of one method's analysis within a pair."""

    method: str
    tradeoff: bool
    ate_x: float
    ate_y: float
    causes: tuple[CauseEvidence, ...] = ()
    inconclusive: tuple[str, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        """JSON document."""
        return {
            "method": self.method,
            "tradeoff": self.tradeoff,
            "ate_x": self.ate_x,
            "ate_y": self.ate_y,
            "causes": [c.to_dict() for c in self.causes],
            "inconclusive": list(self.inconclusive),
        }


@dataclass(frozen=True)
class PairReport:
    """Per-method results and cause confidence for one metric pair."""

    x: str
    y: str
    count: int
    methods: tuple[MethodEntry, ...]
    confidence: dict[str, float]

    def roles(self) -> dict[str, Role]:
        """Role of every node blamed for this pair."""
        return {c.node: c.role for m in self.methods for c in m.causes}

    def to_dict(self) -> dict[str, Any]:
        """JSON document."""
        return {
            "x": self.x,
            "y": self.y,
            "count": self.count,
            "methods": [m.to_dict() for m in self.methods],
            "confidence": dict(self.confidence),
        }


@dataclass(frozen=True)
class Report:
    """Per-pair trade-off counts, per-method evidence and cause confidence."""

    pairs: tuple[PairReport, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        """JSON document."""
        return {"pairs": [p.to_dict() for p in self.pairs]}


def build_report(analyses: Sequence[TradeoffAnalysis]) -> Report:
    """Group analyses by metric pair, keeping first-seen pair and method order."""
    groups: dict[tuple[str, str], list[TradeoffAnalysis]] = {}
    for a in analyses:
        groups.setdefault(a.query.pair, []).append(a)

    pairs = []
    for (x, y), members in groups.items():
        table = aggregate(members)
        methods = tuple(
            MethodEntry(
                method=a.query.method,
                tradeoff=a.detected,
                ate_x=a.detection.ate_x,
                ate_y=a.detection.ate_y,
                causes=a.causes,
                inconclusive=a.inconclusive,
            )
            for a in members
        )
        pairs.append(PairReport(x, y, table.count, methods, table.confidence))
    return Report(tuple(pairs))


UNTIERED = "untiered"


@dataclass(frozen=True)
class CauseDistribution:
    """Number of metric pairs in which each node is blamed, also summed per pipeline tier."""

    by_node: dict[str, int]
    by_tier: dict[str, int]

    @property
    def total(self) -> int:
        """Blamed (pair, node) combinations."""
        return sum(self.by_node.values())

    def to_dict(self) -> dict[str, Any]:
        """JSON document."""
        return {"by_node": dict(self.by_node), "by_tier": dict(self.by_tier), "total": self.total}


def cause_distribution(report: Report, specs: Sequence[VariableSpec]) -> CauseDistribution:
    """Count the metric pairs blaming each node and group the counts by tier.

    Every tier appears in `by_tier`, zero when none of its nodes is blamed;
    nodes without a tier count under "untiered".

    Raises:
        UnknownNodeError: A blamed node is not declared in `specs`.
    """
    tiers = {s.name: s.tier.value if s.tier is not None else UNTIERED for s in specs}
    blamed = Counter(node for p in report.pairs for node, c in p.confidence.items() if c > 0.0)
    unknown = sorted(set(blamed) - set(tiers))
    if unknown:
        raise UnknownNodeError(f"blamed nodes missing from the study: {', '.join(unknown)}")
    by_tier = {t.value: 0 for t in Tier}
    by_tier[UNTIERED] = 0
    for node, count in blamed.items():
        by_tier[tiers[node]] += count
    return CauseDistribution({node: blamed[node] for node in sorted(blamed)}, by_tier)


def report_text(report: Report) -> str:
    """Canonical JSON text of a report."""
    return canonical_json(report.to_dict())


def annotated_dot(report: Report, g: CausalGraph) -> str:
    """DOT rendering of `g` with blamed nodes colored by role and labelled with confidence."""
    roles: dict[str, str] = {}
    notes: dict[str, list[str]] = {}
    for pair in report.pairs:
        for node, role in pair.roles().items():
            roles.setdefault(node, role.value)
            level = confidence_level(pair.confidence[node]).value
            notes.setdefault(node, []).append(
                f"{role.value} {pair.x}/{pair.y}: {pair.confidence[node]:.2f} ({level})"
            )
    labels = {node: "\n".join(lines) for node, lines in notes.items()}
    return graph_to_dot(g, roles, labels)


def export_report(
    report: Report,
    path: Union[str, Path],
    dot_path: Optional[Union[str, Path]] = None,
    graph: Optional[CausalGraph] = None,
) -> None:
    """Write the report JSON and, when requested, the annotated graph."""
    if dot_path is not None and graph is None:
        raise ConfigError("an annotated DOT export needs the graph")
    atomic_write(path, report_text(report))
    if dot_path is not None and graph is not None:
        atomic_write(dot_path, annotated_dot(report, graph))


def _cause_from_dict(doc: dict[str, Any]) -> CauseEvidence:
    return CauseEvidence(
        node=doc["node"],
        role=Role(doc["role"]),
        ate_on_x=float(doc["ate_on_x"]),
        ate_on_y=float(doc["ate_on_y"]),
        sign_x=Sign(doc["sign_x"]),
        sign_y=Sign(doc["sign_y"]),
    )


def report_from_dict(doc: dict[str, Any]) -> Report:
    """Inverse of `Report.to_dict`."""
    try:
        pairs = tuple(
            PairReport(
                x=p["x"],
                y=p["y"],
                count=int(p["count"]),
                methods=tuple(
                    MethodEntry(
                        method=m["method"],
                        tradeoff=bool(m["tradeoff"]),
                        ate_x=float(m["ate_x"]),
                        ate_y=float(m["ate_y"]),
                        causes=tuple(_cause_from_dict(c) for c in m["causes"]),
                        inconclusive=tuple(m.get("inconclusive", ())),
                    )
                    for m in p["methods"]
                ),
                confidence={k: float(v) for k, v in p["confidence"].items()},
            )
            for p in doc["pairs"]
        )
    except (KeyError, TypeError, ValueError, AttributeError) as e:
        raise SchemaError(f"malformed report: {e}") from e
    return Report(pairs)


def load_report(path: Union[str, Path]) -> Report:
    """Read a report written by `export_report`."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise IoError(f"cannot read report: {e.strerror or e}", source=str(path)) from e
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e}", source=str(path)) from e
    try:
        return report_from_dict(doc)
    except SchemaError as e:
        raise SchemaError(e.message, source=str(path)) from e
