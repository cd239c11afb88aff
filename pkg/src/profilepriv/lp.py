"""Dense two-phase simplex with Bland's rule.

Small, exact-ish and deterministic: the mechanism LPs in this package have at
most a few thousand variables, so a dense tableau is fine and reproducibility
matters more than speed.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import NumericalFailure

FEAS_TOL = 1e-9
OPT_TOL = 1e-7

_REDUCED_COST_TOL = 1e-10
_PIVOT_TOL = 1e-11
_RATIO_TIE_TOL = 1e-12
_ITERATION_FACTOR = 50


class LpStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


_RELATIONS = ("<=", "=", ">=")


@dataclass(frozen=True)
class Constraint:
    coeffs: np.ndarray
    relation: str
    rhs: float


@dataclass
class LinearProgram:
    """minimize ``objective @ x`` subject to ``constraints`` and ``var_bounds``.

    Bounds may be infinite (``-inf`` / ``inf``); coefficients may not.
    """

    n_vars: int
    objective: np.ndarray
    constraints: list = field(default_factory=list)
    var_bounds: list = field(default_factory=list)

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float)
        if not self.var_bounds:
            self.var_bounds = [(0.0, np.inf)] * self.n_vars
        self.var_bounds = [(float(lo), float(hi)) for lo, hi in self.var_bounds]

    def add(self, coeffs, relation: str, rhs: float) -> None:
        self.constraints.append(Constraint(np.asarray(coeffs, dtype=float), relation, float(rhs)))

    def check(self) -> None:
        n = self.n_vars
        if self.objective.shape != (n,):
            raise ValueError(f"objective has shape {self.objective.shape}, expected ({n},)")
        if not np.all(np.isfinite(self.objective)):
            raise ValueError("objective has non-finite entries")
        if len(self.var_bounds) != n:
            raise ValueError(f"{len(self.var_bounds)} bounds for {n} variables")
        for j, (lo, hi) in enumerate(self.var_bounds):
            if np.isnan(lo) or np.isnan(hi) or lo > hi or lo == np.inf or hi == -np.inf:
                raise ValueError(f"bad bounds {lo, hi} for variable {j}")
        for k, con in enumerate(self.constraints):
            if con.relation not in _RELATIONS:
                raise ValueError(f"constraint {k}: unknown relation {con.relation!r}")
            if con.coeffs.shape != (n,):
                raise ValueError(f"constraint {k}: {con.coeffs.shape[0]} coefficients for {n} variables")
            if not (np.all(np.isfinite(con.coeffs)) and np.isfinite(con.rhs)):
                raise ValueError(f"constraint {k}: non-finite value")

    def max_violation(self, x: np.ndarray) -> float:
        """Largest amount by which ``x`` breaks a constraint or bound."""
        worst = 0.0
        for (lo, hi), xj in zip(self.var_bounds, x):
            worst = max(worst, lo - xj, xj - hi)
        for con in self.constraints:
            lhs = float(con.coeffs @ x)
            if con.relation == "<=":
                worst = max(worst, lhs - con.rhs)
            elif con.relation == ">=":
                worst = max(worst, con.rhs - lhs)
            else:
                worst = max(worst, abs(lhs - con.rhs))
        return worst


@dataclass(frozen=True)
class LpSolution:
    status: LpStatus
    x: Optional[np.ndarray] = None
    objective_value: Optional[float] = None
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


class _Tableau:
    """Rows hold B^-1 [A | b]; ``basis[r]`` is the column basic in row r."""

    def __init__(self, A: np.ndarray, b: np.ndarray, basis: list, cap: int):
        self.T = np.hstack([A, b[:, None]])
        self.basis = list(basis)
        self.iterations = 0
        self.cap = cap

    @property
    def rhs(self):
        return self.T[:, -1]

    def pivot(self, r: int, j: int) -> None:
        self.iterations += 1
        if self.iterations > self.cap:
            raise NumericalFailure(f"simplex exceeded iteration cap {self.cap}")
        T = self.T
        T[r] /= T[r, j]
        col = T[:, j].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        T[np.abs(T) < 1e-15] = 0.0
        self.basis[r] = j

    def reduced_costs(self, c: np.ndarray, ncols: int) -> np.ndarray:
        cb = c[self.basis]
        return c[:ncols] - cb @ self.T[:, :ncols]

    def run(self, c: np.ndarray, ncols: int) -> LpStatus:
        """Bland's-rule simplex over the first ``ncols`` columns."""
        while True:
            z = self.reduced_costs(c, ncols)
            candidates = np.flatnonzero(z < -_REDUCED_COST_TOL)
            if candidates.size == 0:
                return LpStatus.OPTIMAL
            j = int(candidates[0])
            column = self.T[:, j]
            rows = np.flatnonzero(column > _PIVOT_TOL)
            if rows.size == 0:
                return LpStatus.UNBOUNDED
            ratios = self.rhs[rows] / column[rows]
            best = ratios.min()
            tied = rows[ratios <= best + _RATIO_TIE_TOL * max(1.0, abs(best))]
            r = min(tied, key=lambda row: self.basis[row])
            self.pivot(int(r), j)


def _to_nonnegative(lp: LinearProgram):
    """Rewrite bounded variables as x = offset + M @ y with y >= 0.

    Returns ``(offset, M, upper_rows)`` where ``upper_rows`` lists
    ``(y index, width)`` pairs still needing an explicit ``y <= width`` row.
    """
    n = lp.n_vars
    columns, offset, upper_rows = [], np.zeros(n), []
    for j, (lo, hi) in enumerate(lp.var_bounds):
        if np.isfinite(lo):
            offset[j] = lo
            columns.append((j, 1.0))
            if np.isfinite(hi):
                upper_rows.append((len(columns) - 1, hi - lo))
        elif np.isfinite(hi):
            offset[j] = hi
            columns.append((j, -1.0))
        else:
            columns.append((j, 1.0))
            columns.append((j, -1.0))
    M = np.zeros((n, len(columns)))
    for k, (j, sign) in enumerate(columns):
        M[j, k] = sign
    return offset, M, upper_rows


def solve(lp: LinearProgram) -> LpSolution:
    """Solve ``lp`` to optimality or report infeasible/unbounded."""
    lp.check()
    offset, M, upper_rows = _to_nonnegative(lp)
    m = M.shape[1]

    rows, rels, rhs = [], [], []
    for con in lp.constraints:
        rows.append(con.coeffs @ M)
        rels.append(con.relation)
        rhs.append(con.rhs - con.coeffs @ offset)
    for k, width in upper_rows:
        row = np.zeros(m)
        row[k] = 1.0
        rows.append(row)
        rels.append("<=")
        rhs.append(width)
    n_rows = len(rows)
    A = np.array(rows, dtype=float).reshape(n_rows, m)
    b = np.array(rhs, dtype=float)

    scale = np.abs(A).max(axis=1) if m else np.zeros(n_rows)
    scale[scale == 0.0] = 1.0
    A /= scale[:, None]
    b /= scale
    rels = list(rels)
    for r in range(n_rows):
        if b[r] < 0:
            A[r] *= -1
            b[r] *= -1
            rels[r] = {"<=": ">=", ">=": "<=", "=": "="}[rels[r]]

    n_slack = sum(rel != "=" for rel in rels)
    n_art = sum(rel != "<=" for rel in rels)
    ncols = m + n_slack + n_art
    full = np.zeros((n_rows, ncols))
    full[:, :m] = A
    basis = []
    s, a = m, m + n_slack
    for r, rel in enumerate(rels):
        if rel == "<=":
            full[r, s] = 1.0
            basis.append(s)
            s += 1
        else:
            if rel == ">=":
                full[r, s] = -1.0
                s += 1
            full[r, a] = 1.0
            basis.append(a)
            a += 1
    first_art = m + n_slack

    cap = _ITERATION_FACTOR * (lp.n_vars + len(lp.constraints))
    tab = _Tableau(full, b, basis, cap)

    if n_art:
        c1 = np.zeros(ncols)
        c1[first_art:] = 1.0
        tab.run(c1, ncols)
        if float(c1[tab.basis] @ tab.rhs) > FEAS_TOL:
            return LpSolution(LpStatus.INFEASIBLE, iterations=tab.iterations)
        keep = []
        for r in range(len(tab.basis)):
            if tab.basis[r] < first_art:
                keep.append(r)
                continue
            nz = np.flatnonzero(np.abs(tab.T[r, :first_art]) > 1e-9)
            if nz.size:
                tab.pivot(r, int(nz[0]))
                keep.append(r)
            # otherwise the row is redundant and is dropped
        tab.T = tab.T[keep]
        tab.basis = [tab.basis[r] for r in keep]
        full = full[keep]
        b = b[keep]
        tab.T = np.delete(tab.T, np.s_[first_art:ncols], axis=1)
        full = full[:, :first_art]
        ncols = first_art

    c2 = np.zeros(ncols)
    c2[:m] = lp.objective @ M
    status = tab.run(c2, ncols)
    if status is LpStatus.UNBOUNDED:
        return LpSolution(status, iterations=tab.iterations)

    y_full = _basic_solution(full, b, tab)
    x = offset + M @ y_full[:m]
    if lp.max_violation(x) > FEAS_TOL:
        raise NumericalFailure(f"solution violates constraints by {lp.max_violation(x):.3g}")
    return LpSolution(LpStatus.OPTIMAL, x, float(lp.objective @ x), tab.iterations)


def _basic_solution(full: np.ndarray, b: np.ndarray, tab: _Tableau) -> np.ndarray:
    """Recover the vertex for the final basis, refined against the original rows."""
    y = np.zeros(full.shape[1])
    y[tab.basis] = tab.rhs
    if tab.basis:
        B = full[:, tab.basis]
        try:
            refined = np.linalg.solve(B, b)
        except np.linalg.LinAlgError:
            refined = None
        if refined is not None and np.all(np.isfinite(refined)):
            y_ref = np.zeros_like(y)
            y_ref[tab.basis] = refined
            if np.abs(full @ y_ref - b).max() <= np.abs(full @ y - b).max():
                y = y_ref
    y[(y < 0) & (y > -FEAS_TOL)] = 0.0
    return y


def solve_minimax(
    lp: LinearProgram,
    groups: Sequence[Sequence[int]],
    weights: Optional[Sequence[float]] = None,
    refine: bool = False,
) -> LpSolution:
    """Minimize ``max(w_g * x_v for v in g for g in groups)`` over ``lp``'s feasible set.

    ``lp.objective`` is ignored. An epigraph variable ``t`` is appended with
    ``w_g * x_v <= t`` for every grouped variable and ``t`` is minimized.
    With ``refine=True`` a second solve fixes ``t`` at its optimum and
    minimizes the weighted sum of the grouped variables, which picks a
    less perturbing vertex among the minimax optima.

    The returned ``x`` excludes ``t``; ``objective_value`` is the optimal ``t``.
    """
    n = lp.n_vars
    if weights is None:
        weights = [1.0] * len(groups)
    if len(weights) != len(groups):
        raise ValueError("one weight per group required")

    epi = LinearProgram(n + 1, np.eye(n + 1)[n], var_bounds=list(lp.var_bounds) + [(-np.inf, np.inf)])
    for con in lp.constraints:
        epi.add(np.append(con.coeffs, 0.0), con.relation, con.rhs)
    for group, w in zip(groups, weights):
        for v in group:
            row = np.zeros(n + 1)
            row[v] = w
            row[n] = -1.0
            epi.add(row, "<=", 0.0)
    if not any(len(g) for g in groups):
        # nothing to bound; t would be unbounded below
        sol = solve(LinearProgram(n, np.zeros(n), list(lp.constraints), list(lp.var_bounds)))
        if not sol.optimal:
            return sol
        return LpSolution(LpStatus.OPTIMAL, sol.x, 0.0, sol.iterations)

    first = solve(epi)
    if not first.optimal:
        return first
    t_star = float(first.x[n])
    best = first
    if refine:
        obj = np.zeros(n + 1)
        for group, w in zip(groups, weights):
            for v in group:
                obj[v] += w
        second = LinearProgram(n + 1, obj, list(epi.constraints), list(epi.var_bounds))
        second.add(np.eye(n + 1)[n], "<=", t_star)
        try:
            sol = solve(second)
        except NumericalFailure:
            sol = None
        if sol is not None and sol.optimal:
            best = sol
    x = best.x[:n]
    return LpSolution(LpStatus.OPTIMAL, x, t_star, first.iterations + (best.iterations if best is not first else 0))
