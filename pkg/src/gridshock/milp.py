"""Branch-and-bound MILP solver over the dense LP core.

Binary variables only (bounds restricted to [0, 1]).  Search is
deterministic: most-fractional branching with lowest-index tie-breaking,
depth-first diving until the first incumbent, best-bound node selection
afterwards.  Integral candidates are polished by fixing the binaries to
exact 0/1 values and re-solving the continuous LP, so reported incumbents
carry exactly integral binaries.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

from .simplex import GAP_TOL, LpProblem, LpSolution, solve_lp

MILP_GAP_TOL = 1e-6
ROUND_TOL = 1e-6


class MilpNodeLimitError(RuntimeError):
    """Node limit hit before any feasible incumbent was found."""


@dataclass
class MilpProblem:
    lp: LpProblem
    binary_indices: list[int] = field(default_factory=list)

    def __post_init__(self):
        n = self.lp.num_cols
        for j in self.binary_indices:
            if not (0 <= j < n):
                raise ValueError(f"binary index {j} out of range")
            if self.lp.lb[j] < -ROUND_TOL or self.lp.ub[j] > 1.0 + ROUND_TOL:
                raise ValueError(f"binary variable {j} must have bounds within [0, 1]")


@dataclass
class MilpSolution:
    status: str  # "optimal" | "feasible-limit" | "infeasible" | "unbounded"
    x: np.ndarray | None
    objective: float | None
    bound_gap: float
    node_count: int


def _is_better(sense: str, a: float, b: float) -> bool:
    return a < b - 1e-15 if sense == "min" else a > b + 1e-15


def _polish(problem: MilpProblem, x: np.ndarray) -> tuple[np.ndarray, float] | None:
    """Fix binaries to rounded values, re-solve the continuous part.

    Returns (x, objective) with exactly integral binaries, or None if the
    rounding is infeasible (can happen within tolerance of a bound).
    """
    lp = problem.lp
    bidx = problem.binary_indices
    if not bidx:
        return x.copy(), float(lp.c @ x)
    lb = lp.lb.copy()
    ub = lp.ub.copy()
    vals = np.rint(x[bidx])
    lb[bidx] = vals
    ub[bidx] = vals
    fixed = LpProblem(lp.sense, lp.c, lp.A, lp.row_lb, lp.row_ub, lb, ub,
                      lp.row_labels, lp.col_labels)
    sol = solve_lp(fixed)
    if sol.status != "optimal":
        return None
    xp = sol.x.copy()
    xp[bidx] = vals  # exact 0/1 entries
    return xp, float(lp.c @ xp)


def solve_milp(
    problem: MilpProblem,
    node_limit: int = 200_000,
    gap_tol: float = MILP_GAP_TOL,
    warm_start: np.ndarray | None = None,
) -> MilpSolution:
    """Solve a binary MILP by branch and bound.

    ``warm_start`` seeds the incumbent with a candidate point; it is
    polished and kept only if feasible.  On hitting ``node_limit`` the best
    incumbent is returned with status ``feasible-limit``; if none exists,
    :class:`MilpNodeLimitError` is raised.
    """
    lp = problem.lp
    bidx = np.array(sorted(problem.binary_indices), dtype=np.int64)
    sense = lp.sense

    incumbent_x: np.ndarray | None = None
    incumbent_obj = np.inf if sense == "min" else -np.inf

    if warm_start is not None:
        res = _polish(problem, np.asarray(warm_start, dtype=float))
        if res is not None and _feasible(lp, res[0]):
            incumbent_x, incumbent_obj = res

    root = solve_lp(lp)
    if root.status == "infeasible":
        return MilpSolution("infeasible", None, None, np.inf, 1)
    if root.status == "unbounded":
        return MilpSolution("unbounded", None, None, np.inf, 1)

    # node entries: (fixings dict, relaxation solution)
    nodes = 1
    counter = 0
    # diving stack until first incumbent, then best-bound heap
    stack: list[tuple[dict[int, int], LpSolution]] = [({}, root)]
    heap: list[tuple[float, int, dict[int, int], LpSolution]] = []

    def bound_key(obj: float) -> float:
        return obj if sense == "min" else -obj

    def prune(obj: float) -> bool:
        if incumbent_x is None:
            return False
        slack = gap_tol * max(1.0, abs(incumbent_obj))
        if sense == "min":
            return obj >= incumbent_obj - slack
        return obj <= incumbent_obj + slack

    def accept(xcand: np.ndarray):
        nonlocal incumbent_x, incumbent_obj
        res = _polish(problem, xcand)
        if res is None:
            return False
        xp, obj = res
        if incumbent_x is None or _is_better(sense, obj, incumbent_obj):
            incumbent_x, incumbent_obj = xp, obj
        return True

    def child(fixings: dict[int, int], j: int, val: int):
        f = dict(fixings)
        f[j] = val
        lb = lp.lb.copy()
        ub = lp.ub.copy()
        for k, v in f.items():
            lb[k] = float(v)
            ub[k] = float(v)
        sub = LpProblem(sense, lp.c, lp.A, lp.row_lb, lp.row_ub, lb, ub,
                        lp.row_labels, lp.col_labels)
        return f, solve_lp(sub)

    while stack or heap:
        if nodes >= node_limit:
            if incumbent_x is None:
                raise MilpNodeLimitError(f"node limit {node_limit} reached with no incumbent")
            gap = _gap(sense, incumbent_obj, stack, heap)
            return MilpSolution("feasible-limit", incumbent_x, incumbent_obj, gap, nodes)

        if incumbent_x is None and stack:
            fixings, rel = stack.pop()
        elif heap:
            _, _, fixings, rel = heapq.heappop(heap)
        elif stack:
            fixings, rel = stack.pop()
        else:
            break

        if rel.status != "optimal" or prune(rel.objective):
            continue

        frac = np.abs(rel.x[bidx] - np.rint(rel.x[bidx])) if bidx.size else np.zeros(0)
        if bidx.size == 0 or np.all(frac <= ROUND_TOL):
            if accept(rel.x):
                # drain the dive stack now that an incumbent exists
                while stack:
                    f, sol = stack.pop()
                    if sol.status == "optimal" and not prune(sol.objective):
                        counter += 1
                        heapq.heappush(heap, (bound_key(sol.objective), counter, f, sol))
                continue
            # rounding infeasible: force the most ambiguous binary both ways
            unfixed = [k for k, jj in enumerate(bidx) if int(jj) not in fixings]
            if not unfixed:
                continue
            j_local = max(unfixed, key=lambda k: (frac[k], -k))
            j = int(bidx[j_local])
            toward = int(np.rint(rel.x[j]))
        else:
            # most-fractional branching, lowest index on ties
            key = np.where(frac > ROUND_TOL,
                           np.minimum(rel.x[bidx] - np.floor(rel.x[bidx]),
                                      np.ceil(rel.x[bidx]) - rel.x[bidx]), -1.0)
            j_local = int(np.argmax(key))
            j = int(bidx[j_local])
            toward = int(np.rint(rel.x[j]))  # dive toward the nearest integer first

        kids = []
        for val in (toward, 1 - toward):
            f, sol = child(fixings, j, val)
            nodes += 1
            if sol.status == "optimal" and not prune(sol.objective):
                kids.append((f, sol))
        if incumbent_x is None:
            # dive: push the away-branch first so the toward-branch pops next
            for f, sol in reversed(kids):
                stack.append((f, sol))
        else:
            for f, sol in kids:
                counter += 1
                heapq.heappush(heap, (bound_key(sol.objective), counter, f, sol))
            # drain any leftover dive stack into the heap once an incumbent exists
            while stack:
                f, sol = stack.pop()
                if sol.status == "optimal" and not prune(sol.objective):
                    counter += 1
                    heapq.heappush(heap, (bound_key(sol.objective), counter, f, sol))

    if incumbent_x is None:
        return MilpSolution("infeasible", None, None, np.inf, nodes)
    return MilpSolution("optimal", incumbent_x, incumbent_obj, 0.0, nodes)


def _feasible(lp: LpProblem, x: np.ndarray, tol: float = 1e-6) -> bool:
    act = lp.A @ x
    return bool(
        np.all(act >= lp.row_lb - tol) and np.all(act <= lp.row_ub + tol)
        and np.all(x >= lp.lb - tol) and np.all(x <= lp.ub + tol)
    )


def _gap(sense, incumbent_obj, stack, heap) -> float:
    bounds = [rel.objective for _, rel in stack if rel.status == "optimal"]
    bounds += [rel.objective for _, _, _, rel in heap if rel.status == "optimal"]
    if not bounds:
        return 0.0
    best = min(bounds) if sense == "min" else max(bounds)
    return abs(best - incumbent_obj) / max(1.0, abs(incumbent_obj))
