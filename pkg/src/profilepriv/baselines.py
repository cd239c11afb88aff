"""Local differential privacy baselines: binary and k-ary randomized response."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, DomainError
from .graph import ProfileGraph, graph_hash
from .mechanisms import Mechanism


@dataclass(frozen=True, eq=False)
class LdpMechanism:
    d: int
    epsilon: float
    matrix: np.ndarray

    @property
    def keep_probability(self) -> float:
        return float(self.matrix[0, 0])

    @property
    def flip_probability(self) -> float:
        """Probability of reporting any one specific other category."""
        return float(self.matrix[0, 1])

    def ldp_epsilon(self) -> float:
        """Largest log ratio between two entries of the same column."""
        m = self.matrix
        return float(np.max(np.log(m.max(axis=0)) - np.log(m.min(axis=0))))


def randomized_response(d: int, epsilon: float) -> LdpMechanism:
    """Keep the true category w.p. e^eps / (e^eps + d - 1), else report another uniformly."""
    if not isinstance(d, (int, np.integer)) or d < 2:
        raise DomainError(f"d must be an integer >= 2, got {d!r}")
    if not (epsilon > 0 and math.isfinite(epsilon)):
        raise DomainError(f"epsilon must be positive and finite, got {epsilon!r}")
    # 1 / (e^eps + d - 1) written to stay accurate for large eps
    off = math.exp(-epsilon) / (1.0 + (d - 1) * math.exp(-epsilon))
    m = np.full((d, d), off)
    np.fill_diagonal(m, 1.0 - (d - 1) * off)
    m.setflags(write=False)
    return LdpMechanism(int(d), float(epsilon), m)


def as_profile_mechanism(ldp: LdpMechanism, graph: ProfileGraph) -> Mechanism:
    """Use the same LDP matrix for every profile of ``graph``."""
    if ldp.d != graph.d:
        raise DimensionMismatch(f"LDP mechanism has d = {ldp.d}, graph has d = {graph.d}")
    mats = np.repeat(np.asarray(ldp.matrix)[None], graph.k, axis=0)
    return Mechanism(ldp.epsilon, graph_hash(graph), tuple(graph.ids), mats)
