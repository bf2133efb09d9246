"""LP/MIP solving behind a pluggable backend boundary.

The builtin engine is a bounded-variable revised simplex (two phases, eta
updates with periodic refactorization, Bland's rule after a stall) with
best-bound branch-and-bound on the integer variables. It is written for
predictable, testable behavior on desk-scale problems. The ``highs`` backend
delegates to scipy's HiGHS bindings through the same LinearProgram interface
and is the default for production-size scenario runs.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ModelError
from .milp import EQ, GE, LE, LinearProgram

STATUS_OPTIMAL = "optimal"
STATUS_INFEASIBLE = "infeasible"
STATUS_UNBOUNDED = "unbounded"
STATUS_LIMIT = "limit-reached"

# dense-tableau memory guard for the builtin engine
_BUILTIN_CELL_LIMIT = 40_000_000


@dataclass
class SolveOptions:
    lp_tolerance: float = 1e-7
    integrality_tolerance: float = 1e-5
    max_bb_nodes: int = 100_000
    time_limit_s: float | None = None
    relative_mip_gap: float = 1e-6
    engine: str = "auto"  # auto | builtin | highs

    def __post_init__(self):
        if self.lp_tolerance <= 0 or self.integrality_tolerance <= 0:
            raise ModelError("tolerances must be positive")
        if self.relative_mip_gap < 0:
            raise ModelError("relative_mip_gap must be >= 0")


@dataclass
class Solution:
    status: str
    x: np.ndarray | None = None
    objective: float | None = None
    mip_gap: float = 0.0
    iterations: int = 0
    nodes: int = 0
    message: str = ""
    gap_history: list[float] = field(default_factory=list)


# ----------------------------------------------------------------------
# Builtin engine: revised simplex with variable bounds
# ----------------------------------------------------------------------

_AT_LOWER, _AT_UPPER, _FREE, _BASIC = 0, 1, 2, 3


class _RevisedSimplex:
    """Two-phase primal simplex on  min c'x  s.t.  Ax = b,  l <= x <= u."""

    REFACTOR_EVERY = 100

    def __init__(self, a, b, c, lb, ub, tol=1e-7, max_iter=None):
        self.a = np.asarray(a, dtype=float)
        self.b = np.asarray(b, dtype=float)
        self.c = np.asarray(c, dtype=float)
        self.lb = np.asarray(lb, dtype=float).copy()
        self.ub = np.asarray(ub, dtype=float).copy()
        self.m, self.n = self.a.shape
        self.tol = tol
        self.max_iter = max_iter or max(5000, 200 * (self.m + 1))
        self.iterations = 0

    def _refactor(self):
        self.binv = np.linalg.inv(self.afull[:, self.basis])
        self._recompute_basics()

    def _recompute_basics(self):
        nonbasic = np.flatnonzero(self.vstat != _BASIC)
        rhs = self.b - self.afull[:, nonbasic] @ self.x[nonbasic]
        self.x[self.basis] = self.binv @ rhs

    def solve(self):
        m, n = self.m, self.n
        self.ntot = n + m
        self.art_sign = np.ones(m)
        self.vstat = np.empty(self.ntot, dtype=np.int8)
        self.x = np.zeros(self.ntot)

        # nonbasic start at the finite bound nearest zero
        for j in range(n):
            lo, hi = self.lb[j], self.ub[j]
            if np.isfinite(lo) and (abs(lo) <= abs(hi) or not np.isfinite(hi)):
                self.vstat[j], self.x[j] = _AT_LOWER, lo
            elif np.isfinite(hi):
                self.vstat[j], self.x[j] = _AT_UPPER, hi
            else:
                self.vstat[j], self.x[j] = _FREE, 0.0

        residual = self.b - self.a @ self.x[:n]
        self.art_sign = np.where(residual >= 0, 1.0, -1.0)
        self.afull = np.hstack([self.a, np.diag(self.art_sign)])
        self.basis = np.arange(n, self.ntot)
        self.lb = np.concatenate([self.lb, np.zeros(m)])
        self.ub = np.concatenate([self.ub, np.full(m, np.inf)])
        for r in range(m):
            j = n + r
            self.vstat[j] = _BASIC
            self.x[j] = abs(residual[r])
        self.binv = np.diag(self.art_sign)

        phase1_cost = np.concatenate([np.zeros(n), np.ones(m)])
        status = self._iterate(phase1_cost)
        if status == STATUS_LIMIT:
            return STATUS_LIMIT, None, None
        art_level = float(self.x[n:].sum())
        if art_level > self.tol * (1.0 + float(np.abs(self.b).sum())):
            return STATUS_INFEASIBLE, None, None

        self._drive_out_artificials()
        self.ub[n:] = 0.0
        self.x[n:] = np.where(np.abs(self.x[n:]) < self.tol, 0.0, self.x[n:])

        phase2_cost = np.concatenate([self.c, np.zeros(m)])
        status = self._iterate(phase2_cost)
        if status == STATUS_LIMIT:
            return STATUS_LIMIT, None, None
        if status == STATUS_UNBOUNDED:
            return STATUS_UNBOUNDED, None, None
        x = self.x[:n].copy()
        return STATUS_OPTIMAL, x, float(self.c @ x)

    def _drive_out_artificials(self):
        changed = False
        for r in range(self.m):
            j = self.basis[r]
            if j < self.n:
                continue
            row_coeffs = self.binv[r] @ self.afull[:, : self.n]
            pivot_j = -1
            for cand in np.flatnonzero(np.abs(row_coeffs) > 1e-9):
                if self.vstat[cand] != _BASIC:
                    pivot_j = int(cand)
                    break
            if pivot_j < 0:
                continue  # redundant row: artificial stays basic at zero
            # degenerate swap: values are unchanged, artificial drops to zero
            w = self.binv @ self.afull[:, pivot_j]
            self._pivot(pivot_j, r, w)
            self.x[j] = 0.0
            self.vstat[j] = _AT_LOWER
            changed = True
        if changed:
            self._refactor()

    def _pivot(self, enter, leave_row, w):
        leave = self.basis[leave_row]
        piv = w[leave_row]
        self.binv[leave_row] /= piv
        for i in range(self.m):
            if i != leave_row and w[i] != 0.0:
                self.binv[i] -= w[i] * self.binv[leave_row]
        self.basis[leave_row] = enter
        self.vstat[enter] = _BASIC
        return leave

    def _iterate(self, cost):
        stall = 0
        bland = False
        last_obj = np.inf
        pivots_since_refactor = 0

        while True:
            if self.iterations >= self.max_iter:
                return STATUS_LIMIT
            self.iterations += 1

            cb = cost[self.basis]
            y = cb @ self.binv
            d = cost - y @ self.afull

            movable = (self.vstat != _BASIC) & (self.lb != self.ub)
            may_rise = movable & ((self.vstat == _AT_LOWER) | (self.vstat == _FREE))
            may_fall = movable & ((self.vstat == _AT_UPPER) | (self.vstat == _FREE))
            rising = may_rise & (d < -self.tol)
            falling = may_fall & (d > self.tol)

            candidates = np.flatnonzero(rising | falling)
            if len(candidates) == 0:
                return STATUS_OPTIMAL
            if bland:
                enter = int(candidates[0])
            else:
                enter = int(candidates[np.argmax(np.abs(d[candidates]))])
            direction = 1 if rising[enter] else -1

            w = self.binv @ self.afull[:, enter]
            g = direction * w

            theta = np.inf
            leave_row = -1
            span = self.ub[enter] - self.lb[enter]
            if np.isfinite(span):
                theta = span
            best_piv = 0.0
            for r in range(self.m):
                gr = g[r]
                if abs(gr) <= 1e-10:
                    continue
                jb = self.basis[r]
                if gr > 0:
                    bound = self.lb[jb]
                    if not np.isfinite(bound):
                        continue
                    t = (self.x[jb] - bound) / gr
                else:
                    bound = self.ub[jb]
                    if not np.isfinite(bound):
                        continue
                    t = (self.x[jb] - bound) / gr
                if t < theta - 1e-12:
                    theta, leave_row, best_piv = t, r, abs(gr)
                elif t < theta + 1e-12 and leave_row >= 0:
                    if bland:
                        if self.basis[r] < self.basis[leave_row]:
                            leave_row, best_piv = r, abs(gr)
                    elif abs(gr) > best_piv:
                        leave_row, best_piv = r, abs(gr)

            if not np.isfinite(theta):
                return STATUS_UNBOUNDED
            theta = max(theta, 0.0)

            # apply the step
            if theta > 0.0:
                for r in range(self.m):
                    if g[r] != 0.0:
                        self.x[self.basis[r]] -= g[r] * theta
                self.x[enter] += direction * theta

            if leave_row < 0:
                # bound flip, basis unchanged
                self.vstat[enter] = _AT_UPPER if direction > 0 else _AT_LOWER
                self.x[enter] = self.ub[enter] if direction > 0 else self.lb[enter]
            else:
                leave = self._pivot(enter, leave_row, w)
                hit_lower = g[leave_row] > 0
                self.vstat[leave] = _AT_LOWER if hit_lower else _AT_UPPER
                self.x[leave] = self.lb[leave] if hit_lower else self.ub[leave]
                pivots_since_refactor += 1
                if pivots_since_refactor >= self.REFACTOR_EVERY:
                    self._refactor()
                    pivots_since_refactor = 0

            obj = float(cost @ self.x)
            if obj < last_obj - 1e-12:
                stall = 0
                bland = False
            else:
                stall += 1
                if stall > 50 + 2 * self.m:
                    bland = True
            last_obj = obj


def _standard_form(lp: LinearProgram):
    """Append one slack per row so every constraint becomes an equality."""
    m, n = lp.num_rows, lp.num_vars
    if (m + 1) * (n + m + 1) > _BUILTIN_CELL_LIMIT:
        raise ModelError(
            f"problem with {m} rows x {n} vars is too large for the builtin "
            "engine; use engine='highs'"
        )
    a = np.zeros((m, n + m))
    a[:, :n] = lp.dense_matrix()
    lb = np.concatenate([lp.lower, np.zeros(m)])
    ub = np.concatenate([lp.upper, np.zeros(m)])
    for i, sense in enumerate(lp.senses):
        a[i, n + i] = 1.0
        if sense == LE:
            lb[n + i], ub[n + i] = 0.0, np.inf
        elif sense == GE:
            lb[n + i], ub[n + i] = -np.inf, 0.0
        elif sense == EQ:
            lb[n + i], ub[n + i] = 0.0, 0.0
        else:
            raise ModelError(f"unknown constraint sense {sense!r}")
    c = np.concatenate([lp.objective, np.zeros(m)])
    return a, lp.rhs.copy(), c, lb, ub


def _builtin_lp(lp: LinearProgram, opts: SolveOptions) -> Solution:
    if np.any(lp.lower > lp.upper):
        return Solution(status=STATUS_INFEASIBLE, message="conflicting variable bounds")
    a, b, c, lb, ub = _standard_form(lp)
    engine = _RevisedSimplex(a, b, c[: a.shape[1]], lb, ub, tol=opts.lp_tolerance)
    status, x, obj = engine.solve()
    if status != STATUS_OPTIMAL:
        return Solution(status=status, iterations=engine.iterations)
    x_struct = x[: lp.num_vars]
    residual = _feasibility_residual(lp, x_struct)
    if residual > opts.lp_tolerance * (1.0 + float(np.abs(lp.rhs).max(initial=0.0))):
        return Solution(
            status=STATUS_LIMIT,
            iterations=engine.iterations,
            message=f"numerical breakdown: residual {residual:.3e}",
        )
    return Solution(
        status=STATUS_OPTIMAL,
        x=x_struct,
        objective=float(lp.objective @ x_struct) + lp.objective_constant,
        iterations=engine.iterations,
    )


def _feasibility_residual(lp: LinearProgram, x: np.ndarray) -> float:
    worst = 0.0
    for cols, vals, sense, rhs in zip(lp.row_cols, lp.row_vals, lp.senses, lp.rhs):
        lhs = float(vals @ x[cols])
        if sense == LE:
            worst = max(worst, lhs - rhs)
        elif sense == GE:
            worst = max(worst, rhs - lhs)
        else:
            worst = max(worst, abs(lhs - rhs))
    worst = max(worst, float(np.max(lp.lower - x, initial=0.0)))
    worst = max(worst, float(np.max(x - lp.upper, initial=0.0)))
    return worst


def _most_fractional(x: np.ndarray, int_idx: np.ndarray, tol: float):
    """Index of the integer variable farthest from integrality; ties -> lowest."""
    best_j, best_score = -1, tol
    for j in int_idx:
        score = min(x[j] - np.floor(x[j]), np.ceil(x[j]) - x[j])
        if score > best_score + 1e-15:
            best_j, best_score = int(j), score
    return best_j


def _builtin_mip(lp: LinearProgram, opts: SolveOptions) -> Solution:
    int_idx = np.flatnonzero(lp.is_integer)
    relax = lp.relaxed()
    if len(int_idx) == 0:
        return _builtin_lp(relax, opts)

    started = time.monotonic()

    def out_of_time():
        return opts.time_limit_s is not None and time.monotonic() - started > opts.time_limit_s

    def solve_node(lower, upper):
        node_lp = replace(relax, lower=lower, upper=upper)
        return _builtin_lp(node_lp, opts)

    root = solve_node(lp.lower.copy(), lp.upper.copy())
    if root.status in (STATUS_INFEASIBLE, STATUS_UNBOUNDED):
        return Solution(status=root.status, nodes=1)
    if root.status == STATUS_LIMIT:
        return root

    incumbent: Solution | None = None
    incumbent_obj = np.inf
    gap_history: list[float] = []
    counter = 0
    heap: list[tuple[float, int, Solution, np.ndarray, np.ndarray]] = []
    heapq.heappush(heap, (root.objective, counter, root, lp.lower.copy(), lp.upper.copy()))
    nodes = 1
    status = STATUS_OPTIMAL

    def current_gap():
        bound = heap[0][0] if heap else incumbent_obj
        if incumbent is None:
            return np.inf
        return (incumbent_obj - bound) / max(1.0, abs(incumbent_obj))

    while heap:
        if nodes >= opts.max_bb_nodes or out_of_time():
            status = STATUS_LIMIT
            break
        bound, _, node_sol, lower, upper = heapq.heappop(heap)
        if incumbent is not None and bound >= incumbent_obj - opts.relative_mip_gap * max(
            1.0, abs(incumbent_obj)
        ):
            continue

        x = node_sol.x
        branch_j = _most_fractional(x, int_idx, opts.integrality_tolerance)
        if branch_j < 0:
            # integral within tolerance
            if node_sol.objective < incumbent_obj - 1e-12:
                snapped = x.copy()
                snapped[int_idx] = np.round(snapped[int_idx])
                incumbent = replace(node_sol, x=snapped)
                incumbent_obj = node_sol.objective
                gap_history.append(current_gap())
            continue

        value = x[branch_j]
        for child in ("down", "up"):
            lo, hi = lower.copy(), upper.copy()
            if child == "down":
                hi[branch_j] = np.floor(value)
            else:
                lo[branch_j] = np.ceil(value)
            if lo[branch_j] > hi[branch_j]:
                continue
            child_sol = solve_node(lo, hi)
            nodes += 1
            if child_sol.status == STATUS_INFEASIBLE:
                continue
            if child_sol.status != STATUS_OPTIMAL:
                status = STATUS_LIMIT
                continue
            if incumbent is not None and child_sol.objective >= incumbent_obj - 1e-12:
                continue
            counter += 1
            heapq.heappush(heap, (child_sol.objective, counter, child_sol, lo, hi))
        gap_history.append(current_gap())
        if incumbent is not None and current_gap() <= opts.relative_mip_gap:
            break

    if incumbent is None:
        if status == STATUS_LIMIT:
            return Solution(status=STATUS_LIMIT, nodes=nodes, message="no incumbent found")
        return Solution(status=STATUS_INFEASIBLE, nodes=nodes)

    final_gap = max(current_gap(), 0.0)
    if status == STATUS_LIMIT and final_gap > opts.relative_mip_gap:
        return replace(
            incumbent,
            status=STATUS_LIMIT,
            mip_gap=final_gap,
            nodes=nodes,
            gap_history=gap_history,
        )
    return replace(
        incumbent, status=STATUS_OPTIMAL, mip_gap=final_gap, nodes=nodes,
        gap_history=gap_history,
    )


# ----------------------------------------------------------------------
# HiGHS engine (scipy bindings)
# ----------------------------------------------------------------------

def _scipy_matrices(lp: LinearProgram):
    import scipy.sparse as sp

    rows, cols, vals = [], [], []
    for i, (rc, rv) in enumerate(zip(lp.row_cols, lp.row_vals)):
        rows.extend([i] * len(rc))
        cols.extend(rc.tolist())
        vals.extend(rv.tolist())
    a = sp.csr_matrix((vals, (rows, cols)), shape=(lp.num_rows, lp.num_vars))
    row_lb = np.empty(lp.num_rows)
    row_ub = np.empty(lp.num_rows)
    for i, sense in enumerate(lp.senses):
        if sense == LE:
            row_lb[i], row_ub[i] = -np.inf, lp.rhs[i]
        elif sense == GE:
            row_lb[i], row_ub[i] = lp.rhs[i], np.inf
        else:
            row_lb[i] = row_ub[i] = lp.rhs[i]
    return a, row_lb, row_ub


_LINPROG_STATUS = {
    0: STATUS_OPTIMAL,
    1: STATUS_LIMIT,
    2: STATUS_INFEASIBLE,
    3: STATUS_UNBOUNDED,
    4: STATUS_LIMIT,
}

_MILP_STATUS = {
    0: STATUS_OPTIMAL,
    1: STATUS_LIMIT,
    2: STATUS_INFEASIBLE,
    3: STATUS_UNBOUNDED,
    4: STATUS_LIMIT,
}


def _highs_lp(lp: LinearProgram, opts: SolveOptions) -> Solution:
    from scipy.optimize import linprog

    a, row_lb, row_ub = _scipy_matrices(lp)
    eq = row_lb == row_ub
    ub_rows = ~eq & np.isfinite(row_ub)
    lb_rows = ~eq & np.isfinite(row_lb)
    a_ub_parts, b_ub_parts = [], []
    if ub_rows.any():
        a_ub_parts.append(a[ub_rows])
        b_ub_parts.append(row_ub[ub_rows])
    if lb_rows.any():
        a_ub_parts.append(-a[lb_rows])
        b_ub_parts.append(-row_lb[lb_rows])
    import scipy.sparse as sp

    a_ub = sp.vstack(a_ub_parts) if a_ub_parts else None
    b_ub = np.concatenate(b_ub_parts) if b_ub_parts else None
    a_eq = a[eq] if eq.any() else None
    b_eq = row_lb[eq] if eq.any() else None
    res = linprog(
        lp.objective,
        A_ub=a_ub,
        b_ub=b_ub,
        A_eq=a_eq,
        b_eq=b_eq,
        bounds=np.column_stack([lp.lower, lp.upper]),
        method="highs",
    )
    status = _LINPROG_STATUS.get(res.status, STATUS_LIMIT)
    if status != STATUS_OPTIMAL:
        return Solution(status=status, message=res.message)
    return Solution(
        status=STATUS_OPTIMAL,
        x=np.asarray(res.x),
        objective=float(res.fun) + lp.objective_constant,
        iterations=int(getattr(res, "nit", 0)),
        message=res.message,
    )


def _highs_mip(lp: LinearProgram, opts: SolveOptions) -> Solution:
    from scipy.optimize import Bounds, LinearConstraint, milp

    if not lp.is_integer.any():
        return _highs_lp(lp, opts)
    a, row_lb, row_ub = _scipy_matrices(lp)
    options = {"mip_rel_gap": opts.relative_mip_gap}
    if opts.time_limit_s is not None:
        options["time_limit"] = opts.time_limit_s
    if opts.max_bb_nodes:
        options["node_limit"] = opts.max_bb_nodes
    res = milp(
        c=lp.objective,
        constraints=LinearConstraint(a, row_lb, row_ub),
        integrality=lp.is_integer.astype(np.int64),
        bounds=Bounds(lp.lower, lp.upper),
        options=options,
    )
    status = _MILP_STATUS.get(res.status, STATUS_LIMIT)
    if res.x is None:
        return Solution(status=status, message=res.message)
    gap = float(res.mip_gap) if res.mip_gap is not None else 0.0
    return Solution(
        status=status,
        x=np.asarray(res.x),
        objective=float(res.fun) + lp.objective_constant,
        mip_gap=gap,
        nodes=int(res.mip_node_count or 0),
        message=res.message,
    )


# ----------------------------------------------------------------------
# Backend registry and public entry points
# ----------------------------------------------------------------------

class SolverBackend:
    def __init__(self, lp_fn, mip_fn):
        self._lp = lp_fn
        self._mip = mip_fn

    def solve_lp(self, lp: LinearProgram, opts: SolveOptions) -> Solution:
        return self._lp(lp, opts)

    def solve_mip(self, lp: LinearProgram, opts: SolveOptions) -> Solution:
        return self._mip(lp, opts)


_BACKENDS: dict[str, SolverBackend] = {
    "builtin": SolverBackend(_builtin_lp, _builtin_mip),
    "highs": SolverBackend(_highs_lp, _highs_mip),
}


def register_backend(name: str, backend: SolverBackend) -> None:
    _BACKENDS[name] = backend


def _backend(opts: SolveOptions) -> SolverBackend:
    engine = opts.engine
    if engine == "auto":
        engine = "highs" if _highs_available() else "builtin"
    try:
        return _BACKENDS[engine]
    except KeyError:
        raise ModelError(f"unknown solver engine {engine!r}") from None


def _highs_available() -> bool:
    try:
        from scipy.optimize import milp  # noqa: F401
        return True
    except ImportError:  # pragma: no cover
        return False


def solve_lp(lp: LinearProgram, opts: SolveOptions | None = None) -> Solution:
    """Solve a pure LP (no integrality allowed)."""
    opts = opts or SolveOptions()
    if lp.is_integer.any():
        raise ModelError("solve_lp expects a relaxed problem; use solve_mip")
    lp.validate()
    return _backend(opts).solve_lp(lp, opts)


def solve_mip(lp: LinearProgram, opts: SolveOptions | None = None) -> Solution:
    """Solve a mixed-integer program; a pure LP degenerates to solve_lp."""
    opts = opts or SolveOptions()
    lp.validate()
    return _backend(opts).solve_mip(lp, opts)
