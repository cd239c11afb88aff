"""Simulation settings: Bernoulli-Couplet, Bernoulli-Chain-6/21 and Categorical-Chain.

Everything here is exact (no sampling), so outputs are deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .baselines import as_profile_mechanism, randomized_response
from .graph import bernoulli_chain, chain_graph, make_graph
from .io import write_csv
from .mechanisms import smooth_categorical, smooth_one_bit
from .verifier import output_distributions

EXPERIMENTS = ("bernoulli-couplet", "bernoulli-chain-6", "bernoulli-chain-21", "categorical-chain")
DEFAULT_EPSILON_GRID = tuple(float(e) for e in np.geomspace(0.05, 5.0, 40))
DEFAULT_P_GRID = tuple(round(0.1 * i, 10) for i in range(11))
CATEGORICAL_CHAIN_PROFILES = (
    (0.2, 0.3, 0.4, 0.1),
    (0.3, 0.3, 0.3, 0.1),
    (0.4, 0.4, 0.1, 0.1),
)


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    epsilon_grid: tuple = DEFAULT_EPSILON_GRID
    output_path: Optional[str] = None
    p_grid: tuple = DEFAULT_P_GRID

    def __post_init__(self):
        if self.name not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.name!r}; choose from {', '.join(EXPERIMENTS)}")
        grid = tuple(float(e) for e in self.epsilon_grid)
        if not grid:
            raise ValueError("epsilon grid is empty")
        if any(not (e > 0 and math.isfinite(e)) for e in grid):
            raise ValueError("epsilon grid values must be positive and finite")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("epsilon grid must be strictly ascending")
        object.__setattr__(self, "epsilon_grid", grid)
        object.__setattr__(self, "p_grid", tuple(float(p) for p in self.p_grid))


@dataclass(frozen=True)
class CoupletRow:
    epsilon: float
    p_i: float
    p_j: float
    alpha_ours: float
    alpha_ldp: float


@dataclass(frozen=True)
class ChainRow:
    epsilon: float
    method: str
    profile: str
    p: float
    pr_one: float


@dataclass(frozen=True)
class CostRow:
    epsilon: float
    method: str
    costs: tuple = field(default=())


def rr_flip(epsilon: float) -> float:
    return 1.0 / (1.0 + math.exp(epsilon))


def run_bernoulli_couplet(epsilon: float, p_grid: Sequence[float] = DEFAULT_P_GRID) -> list:
    """Smooth One Bit against randomized response for every pair ``p_i <= p_j`` of the grid."""
    rows = []
    ps = sorted(float(p) for p in p_grid)
    for n, p_i in enumerate(ps):
        for p_j in ps[n:]:
            g = make_graph([("a", (1 - p_i, p_i)), ("b", (1 - p_j, p_j))], [("a", "b")], epsilon)
            alpha = float(smooth_one_bit(g).flip_probabilities().max())
            rows.append(CoupletRow(float(epsilon), p_i, p_j, alpha, rr_flip(epsilon)))
    return rows


def pr_output_one(p, alpha):
    return p * (1 - alpha) + (1 - p) * alpha


def run_bernoulli_chain(k: int, epsilon_grid: Sequence[float] = DEFAULT_EPSILON_GRID) -> list:
    """Probability of releasing 1 per profile along a k-profile chain, ours and baseline."""
    if k not in (6, 21):
        raise ValueError(f"Bernoulli-Chain is defined for k in (6, 21), got {k}")
    ps = np.linspace(0.0, 1.0, k)
    rows = []
    for eps in epsilon_grid:
        g = bernoulli_chain(ps, eps)
        ours = smooth_one_bit(g).flip_probabilities()
        base = rr_flip(eps)
        for pid, p, a in zip(g.ids, ps, ours):
            rows.append(ChainRow(float(eps), "ours", pid, float(p), float(pr_output_one(p, a))))
            rows.append(ChainRow(float(eps), "ldp", pid, float(p), float(pr_output_one(p, base))))
    return rows


def chain_spread(rows: Sequence[ChainRow], epsilon: float, method: str) -> float:
    vals = [r.pr_one for r in rows if r.epsilon == epsilon and r.method == method]
    return max(vals) - min(vals)


def output_costs(graph, mech) -> np.ndarray:
    """Per output j: the largest |P_i[j] - (P_i A^i)[j]| over profiles i."""
    return np.abs(graph.dists - output_distributions(graph, mech)).max(axis=0)


def run_categorical_chain(epsilon_grid: Sequence[float] = DEFAULT_EPSILON_GRID) -> list:
    rows = []
    for eps in epsilon_grid:
        g = chain_graph(CATEGORICAL_CHAIN_PROFILES, eps)
        ours = output_costs(g, smooth_categorical(g))
        base = output_costs(g, as_profile_mechanism(randomized_response(g.d, eps), g))
        rows.append(CostRow(float(eps), "ours", tuple(float(c) for c in ours)))
        rows.append(CostRow(float(eps), "ldp", tuple(float(c) for c in base)))
    return rows


def run_experiment(spec: ExperimentSpec) -> str:
    """Run one setting over its grid and return (and optionally write) the CSV text."""
    if spec.name == "bernoulli-couplet":
        header = ["epsilon", "p_i", "p_j", "alpha_ours", "alpha_ldp"]
        rows = [
            (r.epsilon, r.p_i, r.p_j, r.alpha_ours, r.alpha_ldp)
            for eps in spec.epsilon_grid
            for r in run_bernoulli_couplet(eps, spec.p_grid)
        ]
    elif spec.name.startswith("bernoulli-chain"):
        header = ["epsilon", "method", "profile", "p", "pr_output_1"]
        rows = [(r.epsilon, r.method, r.profile, r.p, r.pr_one)
                for r in run_bernoulli_chain(int(spec.name.rsplit("-", 1)[1]), spec.epsilon_grid)]
    else:
        d = len(CATEGORICAL_CHAIN_PROFILES[0])
        header = ["epsilon", "method", "output", "cost"]
        rows = [(r.epsilon, r.method, j + 1, c) for r in run_categorical_chain(spec.epsilon_grid)
                for j, c in zip(range(d), r.costs)]
    rows.sort(key=lambda row: tuple(_sort_key(v) for v in row))
    return write_csv(header, rows, spec.output_path)


def _sort_key(v):
    # profile ids sort naturally: P2 before P10
    if isinstance(v, str) and v[:1] == "P" and v[1:].isdigit():
        return (1, int(v[1:]), "")
    if isinstance(v, str):
        return (1, 0, v)
    return (0, v, "")
