"""Profiles, the sensitivity graph over them, and its components."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .errors import GraphValidationError

SIMPLEX_TOL = 1e-12


@dataclass(frozen=True)
class Profile:
    id: str
    dist: tuple

    @property
    def d(self) -> int:
        return len(self.dist)


def bernoulli(id: str, p: float) -> Profile:
    """A one-bit profile, stored as the categorical vector ``(1 - p, p)``."""
    return Profile(id, (1.0 - float(p), float(p)))


@dataclass(frozen=True)
class ProfileGraph:
    profiles: tuple
    edges: tuple
    epsilon: float

    @property
    def ids(self) -> list:
        return [p.id for p in self.profiles]

    @property
    def k(self) -> int:
        return len(self.profiles)

    @property
    def d(self) -> int:
        return self.profiles[0].d

    def index(self, profile_id: str) -> int:
        for i, p in enumerate(self.profiles):
            if p.id == profile_id:
                return i
        raise KeyError(f"unknown profile {profile_id!r}")

    @property
    def dists(self) -> np.ndarray:
        """k x d matrix of profile distributions, rows in profile order."""
        return np.array([p.dist for p in self.profiles], dtype=float)

    @property
    def edge_indices(self) -> list:
        pos = {p.id: i for i, p in enumerate(self.profiles)}
        return [(pos[a], pos[b]) for a, b in self.edges]

    def with_epsilon(self, epsilon: float) -> "ProfileGraph":
        return make_graph(self.profiles, self.edges, epsilon)

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "profiles": [{"id": p.id, "dist": list(p.dist)} for p in self.profiles],
            "edges": [list(e) for e in self.edges],
        }


@dataclass(frozen=True)
class ValidationResult:
    violations: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def validate(graph: ProfileGraph) -> ValidationResult:
    """Collect every broken invariant of ``graph``; never raises."""
    out = []
    eps = graph.epsilon
    if not isinstance(eps, (int, float)) or isinstance(eps, bool) or not math.isfinite(eps) or eps <= 0:
        out.append(f"epsilon must be a positive finite number, got {eps!r}")
    if not graph.profiles:
        out.append("graph has no profiles")

    seen = set()
    dims = set()
    for p in graph.profiles:
        if not isinstance(p.id, str) or not p.id:
            out.append(f"profile id must be a non-empty string, got {p.id!r}")
        elif p.id in seen:
            out.append(f"duplicate profile id {p.id!r}")
        seen.add(p.id)
        dist = p.dist
        dims.add(len(dist))
        if len(dist) < 2:
            out.append(f"profile {p.id!r}: needs at least 2 categories, has {len(dist)}")
        try:
            vals = [float(v) for v in dist]
        except (TypeError, ValueError):
            out.append(f"profile {p.id!r}: non-numeric entry")
            continue
        if not all(math.isfinite(v) and 0.0 <= v <= 1.0 for v in vals):
            out.append(f"profile {p.id!r}: entry outside [0, 1]")
        elif abs(math.fsum(vals) - 1.0) > SIMPLEX_TOL:
            out.append(f"profile {p.id!r}: simplex sum ≠ 1 (sum = {math.fsum(vals)!r})")
    if len(dims) > 1:
        out.append(f"profiles disagree on category count: {sorted(dims)}")

    pairs = set()
    for e in graph.edges:
        if len(e) != 2:
            out.append(f"edge {e!r} must have exactly 2 endpoints")
            continue
        a, b = e
        for end in (a, b):
            if end not in seen:
                out.append(f"edge {e!r} references unknown profile {end!r}")
        if a == b:
            out.append(f"edge {e!r} is a self-loop")
            continue
        key = frozenset((a, b))
        if key in pairs:
            out.append(f"duplicate edge {e!r}")
        pairs.add(key)
    return ValidationResult(tuple(out))


def make_graph(profiles: Iterable, edges: Iterable, epsilon: float) -> ProfileGraph:
    """Build, validate and renormalize a graph; raises GraphValidationError."""
    profiles = tuple(p if isinstance(p, Profile) else Profile(p[0], tuple(p[1])) for p in profiles)
    profiles = tuple(Profile(p.id, tuple(p.dist)) for p in profiles)
    edges = tuple(tuple(e) for e in edges)
    graph = ProfileGraph(profiles, edges, epsilon)
    result = validate(graph)
    if not result.ok:
        raise GraphValidationError(result.violations)
    normed = []
    for p in profiles:
        total = math.fsum(float(v) for v in p.dist)
        normed.append(Profile(p.id, tuple(float(v) / total for v in p.dist)))
    return replace(graph, profiles=tuple(normed), epsilon=float(epsilon))


def chain_graph(dists: Sequence, epsilon: float, prefix: str = "P") -> ProfileGraph:
    """Profiles ``P1..Pk`` joined in a path P1-P2-...-Pk."""
    ids = [f"{prefix}{i + 1}" for i in range(len(dists))]
    return make_graph(zip(ids, dists), zip(ids, ids[1:]), epsilon)


def bernoulli_chain(ps: Sequence[float], epsilon: float) -> ProfileGraph:
    return chain_graph([(1.0 - p, p) for p in ps], epsilon)


def connected_components(graph: ProfileGraph) -> list:
    """Components as lists of profile ids.

    Components are ordered by their first profile and members keep profile
    order, so the result does not depend on how edges are listed.
    """
    adj = {p.id: set() for p in graph.profiles}
    for a, b in graph.edges:
        adj[a].add(b)
        adj[b].add(a)
    order = {pid: i for i, pid in enumerate(adj)}
    seen, parts = set(), []
    for start in adj:
        if start in seen:
            continue
        stack, part = [start], []
        seen.add(start)
        while stack:
            node = stack.pop()
            part.append(node)
            for nxt in adj[node]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        parts.append(sorted(part, key=order.__getitem__))
    return parts


def subgraph(graph: ProfileGraph, ids: Sequence[str]) -> ProfileGraph:
    keep = set(ids)
    profiles = tuple(p for p in graph.profiles if p.id in keep)
    edges = tuple(e for e in graph.edges if e[0] in keep and e[1] in keep)
    return ProfileGraph(profiles, edges, graph.epsilon)


def graph_hash(graph: ProfileGraph) -> str:
    blob = json.dumps(graph.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()
