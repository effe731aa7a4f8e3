"""Bayesian Gaussian equivalent (BGe) scoring of DAGs.

The score is the log marginal likelihood of the data under a normal-Wishart
prior. It decomposes over nodes and gives Markov-equivalent DAGs the same
value. Columns are standardized before scoring, which fixes the prior mean at
zero and makes the score invariant to column scale.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.special import multigammaln

from faircause.core import CausalGraph, ObservationMatrix
from faircause.exceptions import (
    ConfigError, InsufficientRowsError, NodeSetMismatchError, NumericalError,
)


@dataclass(frozen=True)
class BgeHyper:
    """Normal-Wishart hyperparameters.

    `alpha_w` defaults to M + 2 and `prior_scale_t` to
    alpha_mu * (alpha_w - M - 1) / (alpha_mu + 1), where M is the number of
    variables of the data being scored.
    """

    alpha_mu: float = 1.0
    alpha_w: Optional[float] = None
    prior_mean: Optional[tuple[float, ...]] = None
    prior_scale_t: Optional[float] = None

    def resolve(self, m: int) -> tuple[float, float, float, np.ndarray]:
        """Concrete (alpha_mu, alpha_w, t, prior mean) for M = `m` variables."""
        if not self.alpha_mu > 0:
            raise ConfigError(f"alpha_mu must be positive, got {self.alpha_mu}")
        alpha_w = float(m + 2) if self.alpha_w is None else float(self.alpha_w)
        if not alpha_w > m - 1:
            raise ConfigError(f"alpha_w must exceed M - 1 = {m - 1}, got {alpha_w}")
        if self.prior_scale_t is None:
            t = self.alpha_mu * (alpha_w - m - 1) / (self.alpha_mu + 1)
        else:
            t = float(self.prior_scale_t)
        if not t > 0:
            raise ConfigError(f"prior_scale_t must be positive, got {t}")
        mean = np.zeros(m) if self.prior_mean is None else np.asarray(self.prior_mean, dtype=float)
        if mean.shape != (m,):
            raise ConfigError(f"prior_mean must have {m} entries")
        return self.alpha_mu, alpha_w, t, mean


class BgeScorer:
    """Cached BGe local scores for one dataset."""

    def __init__(self, data: ObservationMatrix, h: Optional[BgeHyper] = None) -> None:
        """Precompute the posterior scale matrix.

        Args:
            data: Observations; standardized internally.
            h: Hyperparameters, defaults when None.
        """
        x = data.standardized()
        n, m = x.shape
        if n <= m:
            raise InsufficientRowsError(f"BGe scoring needs more runs than variables, got {n} <= {m}")
        alpha_mu, alpha_w, t, mean = (h or BgeHyper()).resolve(m)

        xbar = x.mean(axis=0)
        centered = x - xbar
        diff = (mean - xbar).reshape(-1, 1)
        self.names = data.names
        self.n = n
        self.m = m
        self._alpha_mu = alpha_mu
        self._alpha_w = alpha_w
        self._t = t
        self._r = t * np.eye(m) + centered.T @ centered + (n * alpha_mu / (n + alpha_mu)) * (diff @ diff.T)
        self._log_ml: dict[tuple[int, ...], float] = {}

    def index(self, name: str) -> int:
        """Column position of `name` in the scored data."""
        try:
            return self.names.index(name)
        except ValueError:
            raise NodeSetMismatchError(f"{name!r} is not a scored variable") from None

    def log_ml(self, columns: Iterable[int]) -> float:
        """Log marginal likelihood of the data restricted to `columns`."""
        key = tuple(sorted(columns))
        cached = self._log_ml.get(key)
        if cached is not None:
            return cached

        s = len(key)
        if s == 0:
            return 0.0
        n, m, t = self.n, self.m, self._t
        a = self._alpha_w - m + s
        sign, logdet_r = np.linalg.slogdet(self._r[np.ix_(key, key)])
        if sign <= 0:
            raise NumericalError(f"posterior scale over {[self.names[i] for i in key]} is not positive definite")
        value = (
            -(n * s / 2) * math.log(math.pi)
            + (s / 2) * math.log(self._alpha_mu / (n + self._alpha_mu))
            + multigammaln((n + a) / 2, s)
            - multigammaln(a / 2, s)
            + (a / 2) * s * math.log(t)
            - ((n + a) / 2) * logdet_r
        )
        self._log_ml[key] = float(value)
        return float(value)

    def local(self, node: int, parents: Iterable[int]) -> float:
        """Local score of `node` given `parents` (column indices)."""
        parents = tuple(parents)
        if node in parents:
            raise ConfigError(f"{self.names[node]!r} cannot be its own parent")
        return self.log_ml(parents + (node,)) - self.log_ml(parents)

    def local_by_name(self, node: str, parents: Iterable[str]) -> float:
        """Local score addressed by variable names."""
        return self.local(self.index(node), [self.index(p) for p in parents])

    def score(self, g: CausalGraph) -> float:
        """Total score: the sum of local scores in node order."""
        if set(g.nodes) != set(self.names):
            raise NodeSetMismatchError("graph nodes differ from the scored variables")
        return float(sum(self.local_by_name(node, g.parents(node)) for node in self.names))


def bge_local_score(
    data: ObservationMatrix, node: str, parents: Sequence[str], h: Optional[BgeHyper] = None
) -> float:
    """Log marginal likelihood gain of `node` given `parents`."""
    if node in parents:
        raise ConfigError(f"{node!r} cannot be its own parent")
    return BgeScorer(data, h).local_by_name(node, parents)


def bge_score(data: ObservationMatrix, g: CausalGraph, h: Optional[BgeHyper] = None) -> float:
    """Decomposable BGe score of `g` on `data`."""
    return BgeScorer(data, h).score(g)
