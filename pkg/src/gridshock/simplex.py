"""Dense bounded-variable revised simplex solver with dual extraction.

Solves  min/max  c.x  subject to  row_lb <= A x <= row_ub,  lb <= x <= ub.
Rows with row_lb == row_ub are equalities; infinite bounds are allowed on
either side of rows and variables.

Internally the problem is converted to the standard bounded form

    [A | -I] [x; t] = 0,      lb <= x <= ub,   row_lb <= t <= row_ub,

where t is the row-activity variable ("slack").  A two-phase method with
one artificial column per initially violated row handles feasibility.  The
basis inverse is kept explicitly and refactorized periodically; pivoting
is deterministic (Dantzig pricing with lowest-index tie-breaking, Bland's
rule fallback after a degenerate stall).

Dual sign convention (documented for callers):
  * minimization: row dual y_i >= 0 when the row's lower bound is active,
    y_i <= 0 when the upper bound is active; d(obj)/d(bound) = y_i.
  * maximization: the mirror image (y_i >= 0 on an active upper bound).
  * reduced cost rc_j = c_j - y.A_j in the caller's objective; for
    minimization rc_j >= 0 at an active variable lower bound.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

FEAS_TOL = 1e-7
GAP_TOL = 1e-6
CS_TOL = 1e-6
_PIVOT_TOL = 1e-9
_RC_TOL = 1e-9
_REFACTOR_EVERY = 64
_STALL_LIMIT = 200
_VERIFY_ROUNDS = 6

_AT_LOWER = 0
_AT_UPPER = 1
_AT_ZERO = 2  # nonbasic free variable parked at zero
_BASIC = 3


class SolverNumericalError(RuntimeError):
    """Raised when the simplex cannot make progress (iteration cap, singular basis)."""


@dataclass
class LpProblem:
    """Dense LP in canonical ranged-row form.

    ``row_lb[i] == row_ub[i]`` marks an equality row.  Labels are optional
    and only used for traceability (debug dumps, error messages).
    """

    sense: str  # "min" | "max"
    c: np.ndarray
    A: np.ndarray
    row_lb: np.ndarray
    row_ub: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    row_labels: list[str] = field(default_factory=list)
    col_labels: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        self.row_lb = np.asarray(self.row_lb, dtype=float)
        self.row_ub = np.asarray(self.row_ub, dtype=float)
        self.lb = np.asarray(self.lb, dtype=float)
        self.ub = np.asarray(self.ub, dtype=float)
        m, n = self.A.shape
        if self.c.shape != (n,):
            raise ValueError(f"cost vector has shape {self.c.shape}, expected ({n},)")
        for name, vec, size in (
            ("row_lb", self.row_lb, m),
            ("row_ub", self.row_ub, m),
            ("lb", self.lb, n),
            ("ub", self.ub, n),
        ):
            if vec.shape != (size,):
                raise ValueError(f"{name} has shape {vec.shape}, expected ({size},)")
        if self.sense not in ("min", "max"):
            raise ValueError(f"sense must be 'min' or 'max', got {self.sense!r}")
        for name, arr in (("c", self.c), ("A", self.A)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains NaN or Inf")
        for name, arr in (("row_lb", self.row_lb), ("row_ub", self.row_ub),
                          ("lb", self.lb), ("ub", self.ub)):
            if np.any(np.isnan(arr)):
                raise ValueError(f"{name} contains NaN")
        if np.any(self.row_lb > self.row_ub) or np.any(self.lb > self.ub):
            raise ValueError("lower bound exceeds upper bound")

    @property
    def num_rows(self) -> int:
        return self.A.shape[0]

    @property
    def num_cols(self) -> int:
        return self.A.shape[1]


@dataclass
class LpSolution:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray | None
    duals: np.ndarray | None
    reduced_costs: np.ndarray | None
    objective: float | None
    iterations: int = 0
    max_primal_residual: float = 0.0
    duality_gap: float = 0.0
    cs_residual: float = 0.0


def dump_lp(problem: LpProblem) -> str:
    """Render a problem in LP text format for external cross-checking."""
    m, n = problem.num_rows, problem.num_cols
    cols = problem.col_labels or [f"x{j}" for j in range(n)]
    rows = problem.row_labels or [f"r{i}" for i in range(m)]
    out = ["Maximize" if problem.sense == "max" else "Minimize"]
    terms = " ".join(
        f"{'+' if cj >= 0 else '-'} {abs(cj):.12g} {cols[j]}"
        for j, cj in enumerate(problem.c) if cj != 0.0
    )
    out.append(" obj: " + (terms or "0 " + cols[0]))
    out.append("Subject To")
    for i in range(m):
        expr = " ".join(
            f"{'+' if a >= 0 else '-'} {abs(a):.12g} {cols[j]}"
            for j, a in enumerate(problem.A[i]) if a != 0.0
        ) or f"0 {cols[0]}"
        lo, up = problem.row_lb[i], problem.row_ub[i]
        if lo == up:
            out.append(f" {rows[i]}: {expr} = {lo:.12g}")
        else:
            if np.isfinite(lo):
                out.append(f" {rows[i]}_lo: {expr} >= {lo:.12g}")
            if np.isfinite(up):
                out.append(f" {rows[i]}_up: {expr} <= {up:.12g}")
    out.append("Bounds")
    for j in range(n):
        lo, up = problem.lb[j], problem.ub[j]
        lo_s = f"{lo:.12g}" if np.isfinite(lo) else "-inf"
        up_s = f"{up:.12g}" if np.isfinite(up) else "+inf"
        out.append(f" {lo_s} <= {cols[j]} <= {up_s}")
    out.append("End")
    return "\n".join(out) + "\n"


def _nonbasic_value(status: int, lo: float, up: float) -> float:
    if status == _AT_LOWER:
        return lo
    if status == _AT_UPPER:
        return up
    return 0.0


class _Tableau:
    """Working state for one simplex run on the standard bounded form."""

    def __init__(self, A_std: np.ndarray, lb: np.ndarray, ub: np.ndarray):
        self.A = A_std
        self.m, self.ncols = A_std.shape
        self.lb = lb
        self.ub = ub
        self.status = np.empty(self.ncols, dtype=np.int8)
        self.basis = np.empty(self.m, dtype=np.int64)
        self.binv = np.eye(self.m)
        self.xB = np.zeros(self.m)
        self.pivots_since_refactor = 0

    def nonbasic_value(self, j: int) -> float:
        s = self.status[j]
        if s == _AT_LOWER:
            return self.lb[j]
        if s == _AT_UPPER:
            return self.ub[j]
        return 0.0

    def full_x(self) -> np.ndarray:
        x = np.empty(self.ncols)
        for j in range(self.ncols):
            if self.status[j] != _BASIC:
                x[j] = self.nonbasic_value(j)
        x[self.basis] = self.xB
        return x

    def refactorize(self):
        B = self.A[:, self.basis]
        try:
            self.binv = np.linalg.inv(B)
        except np.linalg.LinAlgError as exc:
            raise SolverNumericalError("singular basis during refactorization") from exc
        # recompute basic values from scratch: A_N x_N + B x_B = 0
        x = np.zeros(self.ncols)
        for j in range(self.ncols):
            if self.status[j] != _BASIC:
                x[j] = self.nonbasic_value(j)
        rhs = -self.A @ x
        self.xB = self.binv @ rhs
        self.pivots_since_refactor = 0


def _simplex_core(tab: _Tableau, c: np.ndarray, max_iter: int,
                  refactor_every: int = _REFACTOR_EVERY,
                  bland_start: bool = False) -> tuple[str, int]:
    """Run phase-2 style iterations for objective c from a feasible basis.

    Returns (status, iterations) with status in {"optimal", "unbounded"}.
    """
    m = tab.m
    bland = bland_start
    stall = 0
    it = 0
    while True:
        it += 1
        if it > max_iter:
            raise SolverNumericalError(f"iteration limit {max_iter} exceeded")
        y = tab.binv.T @ c[tab.basis]
        rc = c - tab.A.T @ y
        scale = 1.0 + np.max(np.abs(c)) if c.size else 1.0
        tol = _RC_TOL * scale

        # entering candidates: improving direction given nonbasic status
        improv = np.zeros(tab.ncols)
        low = tab.status == _AT_LOWER
        upp = tab.status == _AT_UPPER
        fre = tab.status == _AT_ZERO
        improv[low] = np.where(rc[low] < -tol, -rc[low], 0.0)
        improv[upp] = np.where(rc[upp] > tol, rc[upp], 0.0)
        improv[fre] = np.where(np.abs(rc[fre]) > tol, np.abs(rc[fre]), 0.0)
        if not np.any(improv > 0.0):
            return "optimal", it

        if bland:
            q = int(np.flatnonzero(improv > 0.0)[0])
        else:
            q = int(np.argmax(improv))  # lowest index on ties (argmax picks first)
        direction = 1.0 if (tab.status[q] == _AT_LOWER or
                            (tab.status[q] == _AT_ZERO and rc[q] < 0.0)) else -1.0

        w = tab.binv @ tab.A[:, q]
        d = -direction * w  # basic variables move by d * step

        # two-pass ratio test: find the tightest step, then pivot on the
        # largest direction component within a tolerance band of it
        lb_b = tab.lb[tab.basis]
        ub_b = tab.ub[tab.basis]
        absd = np.abs(d)
        active = absd > _PIVOT_TOL
        caps = np.where(d > 0.0, ub_b - tab.xB, lb_b - tab.xB)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = np.where(active, caps / d, np.inf)
        ratios = np.where(np.isnan(ratios), np.inf, np.maximum(ratios, 0.0))
        step = float(np.min(ratios, initial=np.inf))
        leave_pos = -1
        if np.isfinite(step):
            band = step + 1e-9 * (1.0 + abs(step))
            in_band = np.flatnonzero(active & (ratios <= band))
            if bland:
                leave_pos = int(in_band[np.argmin(tab.basis[in_band])])
            else:
                leave_pos = int(in_band[np.argmax(absd[in_band])])
            step = float(ratios[leave_pos])
        own_range = tab.ub[q] - tab.lb[q]
        flip = False
        if tab.status[q] != _AT_ZERO and np.isfinite(own_range) and own_range < step - 1e-11:
            step = own_range
            flip = True
        if step == np.inf:
            return "unbounded", it

        obj_drop = improv[q] * step
        if obj_drop <= tol * 1e-3:
            stall += 1
            if stall >= _STALL_LIMIT and not bland:
                bland = True  # anti-cycling fallback
        else:
            stall = 0

        if flip:
            tab.xB += d * step
            tab.status[q] = _AT_UPPER if tab.status[q] == _AT_LOWER else _AT_LOWER
            continue

        # pivot: q enters at position leave_pos, old basic leaves to a bound
        leave = int(tab.basis[leave_pos])
        tab.xB += d * step
        enter_val = tab.nonbasic_value(q) + direction * step
        d_leave = d[leave_pos]
        tab.status[leave] = _AT_UPPER if d_leave > 0.0 else _AT_LOWER
        if not np.isfinite(tab.lb[leave]) and not np.isfinite(tab.ub[leave]):
            tab.status[leave] = _AT_ZERO  # free variable pivoting out lands at 0
        tab.basis[leave_pos] = q
        tab.status[q] = _BASIC
        tab.xB[leave_pos] = enter_val

        # eta update of the basis inverse; a relatively small pivot is
        # tolerated for one step but forces an immediate refactorization
        piv = w[leave_pos]
        if abs(piv) < _PIVOT_TOL:
            tab.refactorize()
            continue
        eta = -w / piv
        eta[leave_pos] = 1.0 / piv
        row = tab.binv[leave_pos, :].copy()
        tab.binv += np.outer(eta, row)
        tab.binv[leave_pos, :] = row / piv
        tab.pivots_since_refactor += 1
        if (tab.pivots_since_refactor >= refactor_every
                or abs(piv) < 1e-6 * (1.0 + float(np.max(np.abs(w))))):
            tab.refactorize()


def _equilibrate(A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Power-of-two row/column scaling factors taming the coefficient spread."""
    m, n = A.shape
    R = np.ones(m)
    C = np.ones(n)
    work = np.abs(A)
    for _ in range(2):
        rmax = work.max(axis=1)
        r = np.where(rmax > 0, np.exp2(-np.round(np.log2(np.maximum(rmax, 1e-300)))), 1.0)
        work = work * r[:, None]
        R *= r
        cmax = work.max(axis=0)
        c = np.where(cmax > 0, np.exp2(-np.round(np.log2(np.maximum(cmax, 1e-300)))), 1.0)
        work = work * c[None, :]
        C *= c
    return R, C


def _run_verified(tab: _Tableau, c: np.ndarray, max_iter: int,
                  refactor_every: int = _REFACTOR_EVERY,
                  bland_start: bool = False) -> tuple[str, int]:
    """Iterate until an exact recheck on a fresh basis inverse confirms the
    claimed status; guards against drift-induced false optima."""
    total = 0
    for _ in range(_VERIFY_ROUNDS):
        status, it = _simplex_core(tab, c, max_iter, refactor_every, bland_start)
        total += it
        tab.refactorize()
        if status != "optimal":
            return status, total
        y = tab.binv.T @ c[tab.basis]
        rc = c - tab.A.T @ y
        tol = 10.0 * _RC_TOL * (1.0 + float(np.max(np.abs(c), initial=0.0)))
        low = tab.status == _AT_LOWER
        upp = tab.status == _AT_UPPER
        fre = tab.status == _AT_ZERO
        clean = not (np.any(rc[low] < -tol) or np.any(rc[upp] > tol)
                     or np.any(np.abs(rc[fre]) > tol))
        if clean:
            return "optimal", total
    raise SolverNumericalError("optimality could not be verified after restarts")


def solve_lp(problem: LpProblem, max_iter: int | None = None) -> LpSolution:
    """Solve an LP; optimal solutions carry duals, reduced costs and residuals.

    Deterministic: identical inputs yield bit-identical outputs.  Raises
    :class:`SolverNumericalError` on iteration caps or singular bases.
    """
    m, n = problem.num_rows, problem.num_cols
    sign = 1.0 if problem.sense == "min" else -1.0
    c_user = problem.c

    # equilibrate: scaled vars x' = x / C, scaled rows R * A * C
    if m > 0:
        R, C = _equilibrate(problem.A)
    else:
        R, C = np.ones(0), np.ones(n)
    A_sc = problem.A * R[:, None] * C[None, :] if m > 0 else problem.A.reshape(0, n)
    with np.errstate(invalid="ignore"):
        lb_sc = problem.lb / C
        ub_sc = problem.ub / C
        rlb_sc = problem.row_lb * R
        rub_sc = problem.row_ub * R
    c_int = sign * c_user * C

    # standard form [A | -I][x; t] = 0 with t the row activity
    if m > 0:
        A_std = np.hstack([A_sc, -np.eye(m)])
        lb = np.concatenate([lb_sc, rlb_sc])
        ub = np.concatenate([ub_sc, rub_sc])
    else:
        A_std = A_sc
        lb = lb_sc.copy()
        ub = ub_sc.copy()

    ncols = n + m
    tab = _Tableau(A_std, lb.copy(), ub.copy())

    # initial nonbasic point: finite bound nearest zero, free variables at zero
    for j in range(ncols):
        ljf, ujf = np.isfinite(lb[j]), np.isfinite(ub[j])
        if ljf and ujf:
            tab.status[j] = _AT_LOWER if abs(lb[j]) <= abs(ub[j]) else _AT_UPPER
        elif ljf:
            tab.status[j] = _AT_LOWER
        elif ujf:
            tab.status[j] = _AT_UPPER
        else:
            tab.status[j] = _AT_ZERO

    if m == 0:
        # pure bound problem: minimize each cost term independently
        x = np.empty(n)
        for j in range(n):
            cj = c_int[j]
            if cj > 0:
                x[j] = lb[j]
            elif cj < 0:
                x[j] = ub[j]
            else:
                x[j] = tab.nonbasic_value(j)
            if not np.isfinite(x[j]):
                return LpSolution("unbounded", None, None, None, None)
        obj = float(c_user @ x)
        return LpSolution("optimal", x, np.zeros(0), np.zeros(n), obj)

    init_status = tab.status.copy()
    max_iter = max_iter if max_iter is not None else 50 * (m + n) + 10_000
    finite_bounds = np.concatenate([
        rub_sc[np.isfinite(rub_sc)], rlb_sc[np.isfinite(rlb_sc)],
    ])
    ph1_tol = FEAS_TOL * (1.0 + (np.max(np.abs(finite_bounds)) if finite_bounds.size else 0.0))

    def attempt(refactor_every: int, bland_start: bool):
        """One full two-phase solve; returns (tab, c2, status, iters)."""
        statuses = init_status.copy()
        x0 = np.array([_nonbasic_value(statuses[j], lb[j], ub[j]) for j in range(ncols)])
        act0 = A_std[:, :n] @ x0[:n]
        resid = act0 - np.clip(act0, rlb_sc, rub_sc)
        art_cols = []
        for i in range(m):
            if abs(resid[i]) > FEAS_TOL:
                col = np.zeros(m)
                col[i] = -np.sign(resid[i])
                art_cols.append(col)
                statuses[n + i] = _AT_UPPER if resid[i] > 0 else _AT_LOWER
        n_art = len(art_cols)
        if n_art:
            A_ph1 = np.hstack([A_std, np.column_stack(art_cols)])
            lb1 = np.concatenate([lb, np.zeros(n_art)])
            ub1 = np.concatenate([ub, np.full(n_art, np.inf)])
            t = _Tableau(A_ph1, lb1, ub1)
            t.status[:ncols] = statuses
            t.status[ncols:] = _BASIC
            basis = []
            k = ncols
            for i in range(m):
                if abs(resid[i]) > FEAS_TOL:
                    basis.append(k)
                    k += 1
                else:
                    basis.append(n + i)
                    t.status[n + i] = _BASIC
            t.basis = np.array(basis, dtype=np.int64)
            t.refactorize()
            c1 = np.zeros(ncols + n_art)
            c1[ncols:] = 1.0
            status1, it1 = _run_verified(t, c1, max_iter, refactor_every, bland_start)
            ph1_obj = float(c1[t.basis] @ t.xB)
            if status1 != "optimal" or ph1_obj > ph1_tol:
                return t, None, "infeasible", it1
            t.lb[ncols:] = 0.0
            t.ub[ncols:] = 0.0
            for j in range(ncols, ncols + n_art):
                if t.status[j] != _BASIC:
                    t.status[j] = _AT_LOWER
            c2 = np.concatenate([c_int, np.zeros(m + n_art)])
            status2, it2 = _run_verified(t, c2, max_iter, refactor_every, bland_start)
            return t, c2, status2, it1 + it2
        t = _Tableau(A_std, lb.copy(), ub.copy())
        t.status[:] = statuses
        t.basis = np.arange(n, ncols, dtype=np.int64)
        t.status[n:ncols] = _BASIC
        t.refactorize()
        c2 = np.concatenate([c_int, np.zeros(m)])
        status2, iters = _run_verified(t, c2, max_iter, refactor_every, bland_start)
        return t, c2, status2, iters

    tab = c2 = None
    status2 = ""
    iters = 0
    last_exc: Exception | None = None
    for refactor_every, bland_start in ((_REFACTOR_EVERY, False), (16, False), (8, True)):
        try:
            tab, c2, status2, iters = attempt(refactor_every, bland_start)
            last_exc = None
            break
        except SolverNumericalError as exc:
            last_exc = exc
    if last_exc is not None:
        raise last_exc

    if status2 == "infeasible":
        return LpSolution("infeasible", None, None, None, None, iterations=iters)
    if status2 == "unbounded":
        return LpSolution("unbounded", None, None, None, None, iterations=iters)

    tab.refactorize()  # exact basic values before extraction
    xfull = tab.full_x()
    x = C * xfull[:n]  # back to the caller's variable scale
    y_int = tab.binv.T @ c2[tab.basis]
    y_rows = R * y_int[:m] if m else np.zeros(0)
    # duals of the original rows: rc of activity var t_i is +y_i (scaled back)
    rc_int = sign * c_user - problem.A.T @ y_rows
    y_user = sign * y_rows
    rc_user = sign * rc_int

    obj = float(c_user @ x)
    act = problem.A @ x
    primal_res = float(
        max(
            np.max(np.maximum(problem.row_lb - act, act - problem.row_ub), initial=0.0),
            np.max(np.maximum(problem.lb - x, x - problem.ub), initial=0.0),
        )
    )

    # dual objective in the bounded form: sum of multiplier * supported bound;
    # a nonzero multiplier pointing at an infinite bound is a CS violation
    dual_obj = 0.0
    cs = 0.0
    scale = 1.0 + float(np.max(np.abs(c_user), initial=0.0))
    for j in range(n):
        r = rc_int[j]
        if r == 0.0:
            continue
        bound = problem.lb[j] if r > 0 else problem.ub[j]
        if not np.isfinite(bound):
            if abs(r) > _RC_TOL * scale:
                cs = max(cs, abs(r))
            continue
        dual_obj += r * bound
        cs = max(cs, abs(r * (x[j] - bound)))
    for i in range(m):
        yi = y_rows[i]
        if yi == 0.0:
            continue
        bound = problem.row_lb[i] if yi > 0 else problem.row_ub[i]
        if not np.isfinite(bound):
            if abs(yi) > _RC_TOL * scale:
                cs = max(cs, abs(yi))
            continue
        dual_obj += yi * bound
        cs = max(cs, abs(yi * (act[i] - bound)))
    gap = abs(sign * obj - dual_obj) / max(1.0, abs(obj))

    return LpSolution(
        status="optimal",
        x=x,
        duals=y_user,
        reduced_costs=rc_user,
        objective=obj,
        iterations=iters,
        max_primal_residual=primal_res,
        duality_gap=gap,
        cs_residual=cs,
    )
