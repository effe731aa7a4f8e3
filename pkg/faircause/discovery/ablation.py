"""Tier ablation: how much the methods of each pipeline stage add to a learned graph.

Every variant relearns the graph with some interventional variables isolated
and scores it on the full run table, so all scores share the same data and
hyperparameters. Scores are normalized so that the full study maps to 1 and the
study without any method maps to 0.
"""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, replace
from typing import Any, Optional, Sequence

from faircause.core import ObservationMatrix, Tier, VariableSpec
from faircause.exceptions import ConfigError, NumericalError

from .bge import BgeHyper, bge_score
from .search import MIN_GAIN, SearchConfig, learn_graph

logger = logging.getLogger(__name__)

FULL = "full"
WITHOUT_ALL = "without all"


@dataclass(frozen=True)
class AblationEntry:
    """One relearned graph with a set of methods left out."""

    variant: str
    excluded: tuple[str, ...]
    edges: int
    score: float
    normalized: float

    def to_dict(self) -> dict[str, Any]:
        """JSON document."""
        doc = asdict(self)
        doc["excluded"] = list(self.excluded)
        return doc


@dataclass(frozen=True)
class TierAblation:
    """Variants in the order full, one per method tier, without all."""

    entries: tuple[AblationEntry, ...]

    def normalized(self) -> dict[str, float]:
        """Normalized score of each variant."""
        return {e.variant: e.normalized for e in self.entries}

    def to_dict(self) -> dict[str, Any]:
        """JSON document."""
        return {"variants": [e.to_dict() for e in self.entries]}


def ablate_tiers(
    data: ObservationMatrix,
    specs: Optional[Sequence[VariableSpec]] = None,
    h: Optional[BgeHyper] = None,
    cfg: Optional[SearchConfig] = None,
) -> TierAblation:
    """Relearn the graph without each tier's methods and compare the scores.

    Args:
        data: Observations.
        specs: Variable declarations; default to those of `data`.
        h: BGe hyperparameters.
        cfg: Search options shared by every variant.

    Returns:
        The ablation with scores normalized as
        (score - score without all) / (score full - score without all).
    """
    cfg = cfg or SearchConfig()
    specs = data.variables if specs is None else tuple(specs)
    methods = [s for s in specs if s.is_interventional]
    if not methods:
        raise ConfigError("no interventional variables to ablate")

    variants = [(FULL, ())]
    for tier in Tier:
        members = tuple(s.name for s in methods if s.tier is tier)
        if members:
            variants.append((f"without {tier.value}", members))
    variants.append((WITHOUT_ALL, tuple(s.name for s in methods)))

    raw = []
    for variant, excluded in variants:
        g = learn_graph(data, specs, h, replace(cfg, excluded=cfg.excluded | frozenset(excluded)))
        score = bge_score(data, g, h)
        logger.info("Ablation %s: score %.4f with %d edges", variant, score, len(g.edges))
        raw.append((variant, excluded, len(g.edges), score))

    full, none = raw[0][3], raw[-1][3]
    span = full - none
    if abs(span) <= MIN_GAIN:
        raise NumericalError("the methods do not change the learned score; nothing to normalize")
    return TierAblation(
        tuple(
            AblationEntry(variant, excluded, edges, score, (score - none) / span)
            for variant, excluded, edges, score in raw
        )
    )
