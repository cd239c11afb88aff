"""Synthesis and sampling of profile-based private mechanisms.

Every mechanism is stored the same way: one d x d row-stochastic transition
matrix per profile, in graph order. One-bit mechanisms are the d = 2 case
with matrix ``[[1 - a, a], [a, 1 - a]]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from . import verifier
from .errors import DimensionMismatch, DomainError, NumericalFailure
from .graph import ProfileGraph, connected_components, graph_hash
from .lp import LinearProgram, solve, solve_minimax

STOCHASTIC_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Mechanism:
    epsilon: float
    graph_hash: str
    profile_ids: tuple
    matrices: np.ndarray  # (k, d, d)

    def __post_init__(self):
        m = np.array(self.matrices, dtype=float)
        if m.ndim != 3 or m.shape[1] != m.shape[2]:
            raise DimensionMismatch(f"matrices must have shape (k, d, d), got {m.shape}")
        if m.shape[0] != len(self.profile_ids):
            raise DimensionMismatch(f"{m.shape[0]} matrices for {len(self.profile_ids)} profiles")
        if np.any(m < 0) or np.any(m > 1) or np.abs(m.sum(axis=2) - 1).max(initial=0) > STOCHASTIC_TOL:
            raise DomainError("every matrix row must be a probability vector")
        m.setflags(write=False)
        object.__setattr__(self, "matrices", m)
        object.__setattr__(self, "profile_ids", tuple(self.profile_ids))

    @property
    def d(self) -> int:
        return self.matrices.shape[1]

    def matrix(self, profile_id: str) -> np.ndarray:
        return self.matrices[self.profile_ids.index(profile_id)]

    def max_off_diagonal(self) -> float:
        """The categorical synthesis objective evaluated on this mechanism."""
        off = self.matrices * (1 - np.eye(self.d))
        return float(off.max(initial=0.0))

    def flip_probabilities(self) -> np.ndarray:
        if self.d != 2:
            raise DimensionMismatch("flip probabilities only exist for one-bit mechanisms")
        return self.matrices[:, 0, 1].copy()

    def __eq__(self, other):
        if not isinstance(other, Mechanism):
            return NotImplemented
        return (
            self.epsilon == other.epsilon
            and self.graph_hash == other.graph_hash
            and self.profile_ids == other.profile_ids
            and np.array_equal(self.matrices, other.matrices)
        )

    __hash__ = None


@dataclass(frozen=True)
class Release:
    value: int
    profile_id: str


def one_bit_matrix(alpha: float) -> np.ndarray:
    return np.array([[1.0 - alpha, alpha], [alpha, 1.0 - alpha]])


def _check_bernoulli(p_i, p_j, epsilon):
    for p in (p_i, p_j):
        if not (0.0 <= p <= 1.0):
            raise DomainError(f"Bernoulli parameter {p!r} outside [0, 1]")
    if not (epsilon > 0 and math.isfinite(epsilon)):
        raise DomainError(f"epsilon must be positive and finite, got {epsilon!r}")


def _one_bit_edge_rows(n_vars, vi, pi, vj, pj, epsilon):
    """Linear rows for both outputs of one edge: ``Pr_i(y) <= e^eps Pr_j(y)`` and back.

    ``Pr_i(1) = p_i + (1 - 2 p_i) a_i`` and ``Pr_i(0) = 1 - Pr_i(1)``.
    Each yielded pair is ``(coeffs, rhs)`` for a ``<=`` row.
    """
    e = math.exp(epsilon)
    for base_i, slope_i, base_j, slope_j in (
        (pi, 1 - 2 * pi, pj, 1 - 2 * pj),
        (1 - pi, 2 * pi - 1, 1 - pj, 2 * pj - 1),
    ):
        for (vs, bs, ss), (vo, bo, so) in (
            ((vi, base_i, slope_i), (vj, base_j, slope_j)),
            ((vj, base_j, slope_j), (vi, base_i, slope_i)),
        ):
            row = np.zeros(n_vars)
            row[vs] += ss
            row[vo] -= e * so
            yield row, e * bo - bs


def two_profile_flip(p_i: float, p_j: float, epsilon: float) -> float:
    """Smallest flip probability making two Bernoulli profiles eps-indistinguishable."""
    _check_bernoulli(p_i, p_j, epsilon)
    lp = LinearProgram(1, [1.0], var_bounds=[(0.0, 0.5)])
    for row, rhs in _one_bit_edge_rows(1, 0, p_i, 0, p_j, epsilon):
        lp.add(row, "<=", rhs)
    sol = solve(lp)
    if not sol.optimal:
        raise NumericalFailure(f"flip LP reported {sol.status.value}; a = 1/2 is always feasible")
    return float(sol.x[0])


def flip_closed_form(p_i: float, p_j: float, epsilon: float) -> float:
    """Closed-form solution of the two-profile flip problem.

    Each fraction is the root of one ratio constraint. A constraint already
    met at ``a = 0`` contributes 0 instead; its fraction would be spurious.
    """
    _check_bernoulli(p_i, p_j, epsilon)
    lo, hi = sorted((p_i, p_j))
    e = math.exp(epsilon)
    terms = [0.0]
    n1 = hi - e * lo
    if n1 > 0:
        terms.append(n1 / (2 * n1 - (1 - e)))
    n2 = lo - e * hi + e - 1
    if n2 < 0:
        terms.append(n2 / (2 * (lo - e * hi) + e - 1))
    return max(terms)


def one_bit_log_ratios(p1, p2, alpha):
    """Absolute log output ratios ``(|log r(1)|, |log r(0)|)`` of a shared flip ``alpha``."""
    p1, p2, alpha = np.asarray(p1, float), np.asarray(p2, float), np.asarray(alpha, float)
    one_1 = p1 * (1 - alpha) + (1 - p1) * alpha
    one_2 = p2 * (1 - alpha) + (1 - p2) * alpha
    with np.errstate(divide="ignore"):
        return np.abs(np.log(one_1) - np.log(one_2)), np.abs(np.log1p(-one_1) - np.log1p(-one_2))


def _bernoulli_params(graph: ProfileGraph) -> np.ndarray:
    if graph.d != 2:
        raise DomainError(f"one-bit mechanisms need d = 2 profiles, graph has d = {graph.d}")
    return graph.dists[:, 1]


def _finalize(graph: ProfileGraph, matrices: np.ndarray) -> Mechanism:
    """Clamp and renormalize solver output, then certify it."""
    m = np.clip(np.asarray(matrices, dtype=float), 0.0, 1.0)
    m /= m.sum(axis=2, keepdims=True)
    mech = Mechanism(graph.epsilon, graph_hash(graph), tuple(graph.ids), m)
    report = verifier.verify_exact(graph, mech)
    if not report.passed:
        raise NumericalFailure(
            f"synthesized mechanism fails verification: worst log-ratio {report.overall!r} > {graph.epsilon!r}"
        )
    return mech


def _edges_by_component(graph: ProfileGraph):
    pos = {pid: i for i, pid in enumerate(graph.ids)}
    for comp in connected_components(graph):
        members = set(comp)
        edges = [(pos[a], pos[b]) for a, b in graph.edges if a in members]
        yield [pos[c] for c in comp], edges


def cluster_flip(graph: ProfileGraph, profile_id: str) -> float:
    """Flip probability the cluster mechanism uses for ``profile_id``'s component."""
    p = _bernoulli_params(graph)
    i = graph.index(profile_id)
    for members, edges in _edges_by_component(graph):
        if i in members:
            return max((two_profile_flip(p[a], p[b], graph.epsilon) for a, b in edges), default=0.0)
    raise AssertionError("profile missing from components")


def one_bit_cluster(graph: ProfileGraph) -> Mechanism:
    """One shared flip per component: the largest any of its edges needs."""
    p = _bernoulli_params(graph)
    alphas = np.zeros(graph.k)
    for members, edges in _edges_by_component(graph):
        alpha = max((two_profile_flip(p[a], p[b], graph.epsilon) for a, b in edges), default=0.0)
        alphas[members] = alpha
    return _finalize(graph, np.array([one_bit_matrix(a) for a in alphas]))


def smooth_one_bit(graph: ProfileGraph) -> Mechanism:
    """Per-profile flips minimizing the largest flip, jointly over each component."""
    p = _bernoulli_params(graph)
    alphas = np.zeros(graph.k)
    for members, edges in _edges_by_component(graph):
        if not edges:
            continue
        local = {g: n for n, g in enumerate(members)}
        lp = LinearProgram(len(members), np.zeros(len(members)), var_bounds=[(0.0, 0.5)] * len(members))
        for a, b in edges:
            for row, rhs in _one_bit_edge_rows(len(members), local[a], p[a], local[b], p[b], graph.epsilon):
                lp.add(row, "<=", rhs)
        sol = solve_minimax(lp, [[n] for n in range(len(members))], refine=True)
        if not sol.optimal:
            raise NumericalFailure(f"smooth one-bit LP reported {sol.status.value}; all-1/2 is feasible")
        alphas[members] = np.clip(sol.x, 0.0, 0.5)
    return _finalize(graph, np.array([one_bit_matrix(a) for a in alphas]))


def smooth_categorical(graph: ProfileGraph, weights: Optional[Sequence[float]] = None) -> Mechanism:
    """Transition matrices minimizing the largest (weighted) off-diagonal entry.

    ``weights`` optionally scales each profile's off-diagonal entries in the
    objective, e.g. a prior over profiles; the default treats all alike.
    """
    d, k = graph.d, graph.k
    if weights is None:
        weights = np.ones(k)
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (k,) or np.any(weights <= 0) or not np.all(np.isfinite(weights)):
        raise DomainError("weights must be k positive finite numbers")
    P = graph.dists
    e = math.exp(graph.epsilon)
    mats = np.repeat(np.eye(d)[None], k, axis=0)

    for members, edges in _edges_by_component(graph):
        if not edges:
            continue
        local = {g: n for n, g in enumerate(members)}
        n_vars = len(members) * d * d

        def var(prof, x, y):
            return local[prof] * d * d + x * d + y

        lp = LinearProgram(n_vars, np.zeros(n_vars), var_bounds=[(0.0, 1.0)] * n_vars)
        for prof in members:
            for x in range(d):
                row = np.zeros(n_vars)
                row[[var(prof, x, y) for y in range(d)]] = 1.0
                lp.add(row, "=", 1.0)
        for a, b in edges:
            for y in range(d):
                for s, o in ((a, b), (b, a)):
                    row = np.zeros(n_vars)
                    for x in range(d):
                        row[var(s, x, y)] += P[s, x]
                        row[var(o, x, y)] -= e * P[o, x]
                    lp.add(row, "<=", 0.0)
        groups = [[var(prof, x, y) for x in range(d) for y in range(d) if x != y] for prof in members]
        sol = solve_minimax(lp, groups, weights=[weights[prof] for prof in members], refine=True)
        if not sol.optimal:
            raise NumericalFailure(f"smooth categorical LP reported {sol.status.value}; uniform rows are feasible")
        mats[members] = sol.x.reshape(len(members), d, d)
    return _finalize(graph, mats)


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _sample_rows(rows: np.ndarray, u: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(rows, axis=-1)
    y = (u[:, None] >= cdf).sum(axis=-1)
    return np.minimum(y, rows.shape[-1] - 1)


def apply(mech: Mechanism, profile_id: str, x: int, rng_seed: Union[int, np.random.Generator, None]) -> Release:
    """Release ``y`` drawn from row ``x`` of the profile's transition matrix."""
    if not (0 <= x < mech.d):
        raise IndexError(f"category {x} out of range for d = {mech.d}")
    row = mech.matrix(profile_id)[x]
    y = _sample_rows(row[None], np.array([_rng(rng_seed).random()]))[0]
    return Release(int(y), profile_id)


def apply_many(mech: Mechanism, profile_id: str, xs, rng_seed) -> np.ndarray:
    """Vectorized :func:`apply` over an array of observed categories."""
    xs = np.asarray(xs, dtype=int)
    if xs.size and (xs.min() < 0 or xs.max() >= mech.d):
        raise IndexError(f"categories must lie in [0, {mech.d})")
    rows = mech.matrix(profile_id)[xs]
    return _sample_rows(rows, _rng(rng_seed).random(xs.shape[0]))
