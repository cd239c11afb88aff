"""Exact and sampled certification of (G, eps)-profile-based privacy.

A mechanism passes when, for every edge (P_i, P_j) and every output y, the
release probabilities ``(P_i A^i)_y`` and ``(P_j A^j)_y`` are within a factor
``e^eps`` of each other. Ratios are reported as absolute log values; 0/0 counts
as ratio 1 and x/0 with x > 0 as infinite (a failure, never an exception).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, DomainError, UncertifiedComposition
from .graph import ProfileGraph

VERIFY_MARGIN = 1e-6
_WILSON_Z = 1.959963984540054


@dataclass(frozen=True)
class EdgeReport:
    edge: tuple
    worst_output: int
    max_abs_log_ratio: float
    # sampled reports only: bounds on max_abs_log_ratio from Wilson intervals
    interval: Optional[tuple] = None

    @property
    def infinite(self) -> bool:
        return math.isinf(self.max_abs_log_ratio)


@dataclass(frozen=True)
class PrivacyReport:
    per_edge: tuple
    overall: float
    epsilon: float
    passed: bool
    estimated: bool = False
    overall_interval: Optional[tuple] = None
    # sampled reports only: profile id -> (m, 3) array of (estimate, lo, hi)
    output_estimates: dict = field(default_factory=dict, compare=False)


def abs_log_ratios(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Elementwise ``|log(u / v)|`` with 0/0 -> 0 and x/0, 0/x -> inf."""
    u, v = np.asarray(u, float), np.asarray(v, float)
    out = np.zeros(np.broadcast(u, v).shape)
    both = (u > 0) & (v > 0)
    out[both] = np.abs(np.log(u[both]) - np.log(v[both]))
    out[(u > 0) != (v > 0)] = np.inf
    return out


def _edge_report(edge, u, v, interval=None) -> EdgeReport:
    r = abs_log_ratios(u, v)
    y = int(np.argmax(r)) if r.size else 0
    return EdgeReport(edge, y, float(r[y]) if r.size else 0.0, interval)


def _assemble(per_edge, epsilon, **extra) -> PrivacyReport:
    overall = max((e.max_abs_log_ratio for e in per_edge), default=0.0)
    return PrivacyReport(tuple(per_edge), overall, float(epsilon), overall <= epsilon + VERIFY_MARGIN, **extra)


def report_from_outputs(graph: ProfileGraph, outputs: np.ndarray, epsilon: float) -> PrivacyReport:
    """Certify release distributions given directly, one row per profile."""
    outputs = np.asarray(outputs, dtype=float)
    if outputs.shape[0] != graph.k:
        raise DimensionMismatch(f"{outputs.shape[0]} output rows for {graph.k} profiles")
    per_edge = [
        _edge_report((a, b), outputs[i], outputs[j])
        for (a, b), (i, j) in zip(graph.edges, graph.edge_indices)
    ]
    return _assemble(per_edge, epsilon)


def _check_match(graph: ProfileGraph, mech) -> None:
    if tuple(mech.profile_ids) != tuple(graph.ids):
        raise DimensionMismatch("mechanism profiles do not match the graph's profiles")
    if mech.matrices.shape[1] != graph.d:
        raise DimensionMismatch(f"mechanism has d = {mech.matrices.shape[1]}, graph has d = {graph.d}")


def output_distributions(graph: ProfileGraph, mech) -> np.ndarray:
    """Row i is ``P_i A^i``, the release distribution under profile i."""
    _check_match(graph, mech)
    return np.einsum("kx,kxy->ky", graph.dists, mech.matrices)


def verify_exact(graph: ProfileGraph, mech, epsilon: Optional[float] = None) -> PrivacyReport:
    eps = graph.epsilon if epsilon is None else epsilon
    return report_from_outputs(graph, output_distributions(graph, mech), eps)


def wilson_interval(counts, n: int, z: float = _WILSON_Z):
    counts = np.asarray(counts, dtype=float)
    phat = counts / n
    denom = 1 + z * z / n
    centre = (phat + z * z / (2 * n)) / denom
    half = z * np.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom
    return np.clip(centre - half, 0.0, 1.0), np.clip(centre + half, 0.0, 1.0)


def _abs_log_bounds(lo_u, hi_u, lo_v, hi_v):
    """Range of ``|log(u/v)|`` over the boxes ``u in [lo_u, hi_u]``, ``v in [lo_v, hi_v]``."""
    with np.errstate(divide="ignore"):
        top = np.log(hi_u) - np.log(lo_v)
        bottom = np.log(lo_u) - np.log(hi_v)
    straddles = (bottom <= 0) & (top >= 0)
    low = np.where(straddles, 0.0, np.minimum(np.abs(bottom), np.abs(top)))
    high = np.maximum(np.abs(bottom), np.abs(top))
    return low, high


def verify_monte_carlo(graph: ProfileGraph, mech, n_samples: int, seed, epsilon: Optional[float] = None) -> PrivacyReport:
    """Plug-in estimate of the exact report from sampled releases.

    Each profile draws ``n_samples`` observations and privatizes them with
    its own matrix. Per-edge ``interval`` bounds the true worst log-ratio
    using 95% Wilson intervals on every output probability.
    """
    from .mechanisms import apply_many

    if n_samples < 10_000:
        raise DomainError("n_samples must be at least 10^4")
    _check_match(graph, mech)
    eps = graph.epsilon if epsilon is None else epsilon
    rng = np.random.default_rng(seed)
    d = graph.d
    est, lo, hi = {}, {}, {}
    for p in graph.profiles:
        xs = rng.choice(d, size=n_samples, p=np.asarray(p.dist))
        ys = apply_many(mech, p.id, xs, rng)
        counts = np.bincount(ys, minlength=d)
        est[p.id] = counts / n_samples
        lo[p.id], hi[p.id] = wilson_interval(counts, n_samples)

    per_edge = []
    for a, b in graph.edges:
        low, high = _abs_log_bounds(lo[a], hi[a], lo[b], hi[b])
        per_edge.append(_edge_report((a, b), est[a], est[b], (float(low.max()), float(high.max()))))
    intervals = [e.interval for e in per_edge]
    overall_interval = (
        (max(i[0] for i in intervals), max(i[1] for i in intervals)) if intervals else (0.0, 0.0)
    )
    estimates = {pid: np.column_stack([est[pid], lo[pid], hi[pid]]) for pid in est}
    return _assemble(per_edge, eps, estimated=True, overall_interval=overall_interval, output_estimates=estimates)


def _check_stochastic(F: np.ndarray, what: str) -> None:
    if F.ndim != 2 or np.any(F < 0) or np.abs(F.sum(axis=1) - 1).max(initial=0) > 1e-9:
        raise DomainError(f"{what} must be a row-stochastic matrix")


def check_post_processing(graph: ProfileGraph, mech, post_matrix, epsilon: Optional[float] = None) -> PrivacyReport:
    """Certify the release ``F(A(X_i, P_i))`` for a randomized map ``F`` given as a d x m matrix."""
    F = np.asarray(post_matrix, dtype=float)
    if F.ndim != 2 or F.shape[0] != mech.matrices.shape[2]:
        raise DimensionMismatch(f"post-processing matrix has shape {F.shape}, needs {mech.matrices.shape[2]} rows")
    _check_stochastic(F, "post_matrix")
    eps = graph.epsilon if epsilon is None else epsilon
    return report_from_outputs(graph, output_distributions(graph, mech) @ F, eps)


def check_additive_composition(graph: ProfileGraph, mech1, mech2) -> PrivacyReport:
    """Two independent observations from the same profile, released by both mechanisms.

    The joint release ``(y1, y2)`` (flattened as ``y1 * d2 + y2``) has
    probability ``(P_i A1^i)_y1 (P_i A2^i)_y2``; it is certified at
    ``eps1 + eps2``.
    """
    o1, o2 = output_distributions(graph, mech1), output_distributions(graph, mech2)
    joint = np.einsum("ka,kb->kab", o1, o2).reshape(graph.k, -1)
    return report_from_outputs(graph, joint, mech1.epsilon + mech2.epsilon)


def check_parallel_composition(graph: ProfileGraph, mech1, mech2, prior: Optional[Sequence[float]] = None) -> PrivacyReport:
    """Two independent profile selections, one release each, certified at ``max(eps1, eps2)``.

    For an edge (P_h, P_i) the first selection's secret is compared with the
    second release marginalized over its own selection under ``prior``
    (uniform by default); the symmetric comparison covers the second
    selection. Each edge reports the worse of the two.
    """
    o1, o2 = output_distributions(graph, mech1), output_distributions(graph, mech2)
    w = np.full(graph.k, 1.0 / graph.k) if prior is None else np.asarray(prior, dtype=float)
    if w.shape != (graph.k,) or np.any(w < 0) or not math.isclose(w.sum(), 1.0, abs_tol=1e-9):
        raise DomainError("prior must be a probability vector over the profiles")
    m1, m2 = w @ o1, w @ o2
    per_edge = []
    for (a, b), (i, j) in zip(graph.edges, graph.edge_indices):
        first = _edge_report((a, b), np.outer(o1[i], m2).ravel(), np.outer(o1[j], m2).ravel())
        second = _edge_report((a, b), np.outer(m1, o2[i]).ravel(), np.outer(m1, o2[j]).ravel())
        per_edge.append(max(first, second, key=lambda e: e.max_abs_log_ratio))
    return _assemble(per_edge, max(mech1.epsilon, mech2.epsilon))


COMPOSITION_SETTINGS = ("additive", "parallel", "same-observation", "correlated-profiles")


def check_composition(graph: ProfileGraph, mech1, mech2, setting: str) -> PrivacyReport:
    """Dispatch on the composition setting; settings without a guarantee raise.

    Re-privatizing the same observation correlates the releases, and
    correlated profile selection leaks across rounds; neither composes, so no
    bound is produced for them.
    """
    if setting == "additive":
        return check_additive_composition(graph, mech1, mech2)
    if setting == "parallel":
        return check_parallel_composition(graph, mech1, mech2)
    if setting in ("same-observation", "correlated-profiles"):
        raise UncertifiedComposition(f"no privacy bound exists for {setting} composition")
    raise ValueError(f"unknown composition setting {setting!r}; expected one of {COMPOSITION_SETTINGS}")
