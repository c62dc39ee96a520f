#!/usr/bin/env python3
"""Linear programming core for the restricted master problem.

A bounded-variable revised simplex working on an explicit basis inverse with
product-form updates and periodic refactorization. Every row gets a slack
(``<=``: s >= 0, ``>=``: s <= 0, ``=``: s = 0), so the all-slack basis is
always available; infeasible starting bases are repaired by a composite
phase 1 that minimizes the sum of bound violations. Dantzig pricing is used
until a run of degenerate pivots triggers Bland's rule.

Duals are returned as y = c_B B^-1, one per row: nonnegative on ``>=`` rows
and nonpositive on ``<=`` rows at an optimum of a minimization.
"""

from __future__ import annotations

import math
from typing import Iterable, List, Literal, Optional, Sequence, Tuple

import numpy as np
import structlog
from pydantic import BaseModel, Field, model_validator

from .exceptions import InvalidParameterError

logger = structlog.get_logger(__name__)

RowSense = Literal["<=", ">=", "="]
LpStatus = Literal["optimal", "infeasible", "unbounded", "iteration_limit"]

PIVOT_TOL = 1e-9
STEP_TOL = 1e-12


class LpProblem(BaseModel):
    """min c'x subject to row constraints and variable bounds.

    The constraint matrix is stored column-major and sparse: each column is a
    pair (row indices, values).
    """

    objective: List[float] = Field(default_factory=list)
    columns: List[Tuple[List[int], List[float]]] = Field(default_factory=list)
    senses: List[RowSense] = Field(default_factory=list)
    rhs: List[float] = Field(default_factory=list)
    lower: List[float] = Field(default_factory=list)
    upper: List[float] = Field(default_factory=list)
    names: Optional[List[str]] = Field(default=None, description="Column names")

    @model_validator(mode="after")
    def check_dimensions(self) -> LpProblem:
        n, m = len(self.objective), len(self.senses)
        if not len(self.columns) == len(self.lower) == len(self.upper) == n:
            raise ValueError("objective, columns and bounds differ in length")
        if len(self.rhs) != m:
            raise ValueError("senses and rhs differ in length")
        if not all(math.isfinite(v) for v in self.objective + self.rhs):
            raise ValueError("non-finite objective or rhs coefficient")
        for j, (rows, values) in enumerate(self.columns):
            if len(rows) != len(values) or any(not 0 <= r < m for r in rows):
                raise ValueError(f"column {j} is malformed")
            if not all(math.isfinite(v) for v in values):
                raise ValueError(f"column {j} has a non-finite coefficient")
        for j, (lo, hi) in enumerate(zip(self.lower, self.upper)):
            if lo > hi:
                raise ValueError(f"column {j}: lower bound {lo} above upper bound {hi}")
        return self

    @property
    def n_rows(self) -> int:
        return len(self.senses)

    @property
    def n_cols(self) -> int:
        return len(self.objective)

    def add_column(
        self,
        cost: float,
        rows: Sequence[int],
        values: Sequence[float],
        lower: float = 0.0,
        upper: float = math.inf,
        name: Optional[str] = None,
    ) -> int:
        """Append a column and return its index."""
        if lower > upper:
            raise InvalidParameterError(f"bound inversion {lower} > {upper}")
        if any(not 0 <= r < self.n_rows for r in rows):
            raise InvalidParameterError("column references an unknown row")
        self.objective.append(float(cost))
        self.columns.append((list(rows), [float(v) for v in values]))
        self.lower.append(float(lower))
        self.upper.append(float(upper))
        if self.names is not None:
            self.names.append(name or f"x{len(self.objective) - 1}")
        return len(self.objective) - 1

    def dense_matrix(self) -> np.ndarray:
        a = np.zeros((self.n_rows, self.n_cols))
        for j, (rows, values) in enumerate(self.columns):
            a[rows, j] = values
        return a

    def to_lp_format(self) -> str:
        """Render the problem in CPLEX LP text format for external cross-checks."""
        names = self.names or [f"x{j}" for j in range(self.n_cols)]

        def term(coef: float, name: str, first: bool) -> str:
            sign = "-" if coef < 0 else ("" if first else "+")
            return f"{sign} {abs(coef):.12g} {name}".strip()

        obj = [term(c, names[j], not k) for k, (j, c) in
               enumerate((j, c) for j, c in enumerate(self.objective) if c)]
        lines = ["Minimize", " obj: " + (" ".join(obj) if obj else "0 " + names[0])]
        lines.append("Subject To")
        by_row: List[List[Tuple[int, float]]] = [[] for _ in range(self.n_rows)]
        for j, (rows, values) in enumerate(self.columns):
            for r, v in zip(rows, values):
                if v:
                    by_row[r].append((j, v))
        for r, entries in enumerate(by_row):
            expr = " ".join(term(v, names[j], not k) for k, (j, v) in enumerate(entries))
            lines.append(f" r{r}: {expr or '0 ' + names[0]} {self.senses[r]} {self.rhs[r]:.12g}")
        lines.append("Bounds")
        for j in range(self.n_cols):
            lo = "-inf" if math.isinf(self.lower[j]) else f"{self.lower[j]:.12g}"
            hi = "+inf" if math.isinf(self.upper[j]) else f"{self.upper[j]:.12g}"
            lines.append(f" {lo} <= {names[j]} <= {hi}")
        lines.append("End")
        return "\n".join(lines) + "\n"


class Basis(BaseModel):
    """Basis encoding that survives column additions.

    Structural column j is encoded as j, the slack of row i as -(i + 1).
    """

    basic: List[int]
    at_upper: List[int] = Field(default_factory=list)


class LpSolution(BaseModel):
    status: LpStatus
    x: List[float] = Field(default_factory=list)
    duals: List[float] = Field(default_factory=list, description="One per row")
    reduced_costs: List[float] = Field(default_factory=list)
    objective: float = math.nan
    iterations: int = 0
    basis: Optional[Basis] = None


class _BoundedSimplex:
    def __init__(
        self,
        problem: LpProblem,
        tol_feas: float,
        tol_dual: float,
        max_iterations: int,
        stall_threshold: int,
        refactor_every: int,
    ):
        self.m = m = problem.n_rows
        self.nc = nc = problem.n_cols
        self.tol_feas = tol_feas
        self.tol_dual = tol_dual
        self.max_iterations = max_iterations
        self.stall_threshold = stall_threshold
        self.refactor_every = refactor_every

        self.A = np.hstack([problem.dense_matrix(), np.eye(m)])
        self.b = np.asarray(problem.rhs, dtype=float)
        self.c = np.concatenate([np.asarray(problem.objective, dtype=float), np.zeros(m)])
        slack_lo = {"<=": 0.0, ">=": -math.inf, "=": 0.0}
        slack_hi = {"<=": math.inf, ">=": 0.0, "=": 0.0}
        self.lb = np.concatenate([problem.lower, [slack_lo[s] for s in problem.senses]])
        self.ub = np.concatenate([problem.upper, [slack_hi[s] for s in problem.senses]])
        self.basis = np.arange(nc, nc + m)
        self.x = np.zeros(nc + m)

    def _encode(self, j: int) -> int:
        return int(j) if j < self.nc else -(int(j) - self.nc + 1)

    def _decode(self, code: int) -> int:
        return code if code >= 0 else self.nc + (-code - 1)

    def _place_nonbasic(self, at_upper: Iterable[int] = ()) -> None:
        upper = set(at_upper)
        is_basic = np.zeros(len(self.x), dtype=bool)
        is_basic[self.basis] = True
        for j in np.flatnonzero(~is_basic):
            lo, hi = self.lb[j], self.ub[j]
            if j in upper and math.isfinite(hi):
                self.x[j] = hi
            elif math.isfinite(lo):
                self.x[j] = lo
            elif math.isfinite(hi):
                self.x[j] = hi
            else:
                self.x[j] = 0.0

    def _refactor(self) -> bool:
        try:
            self.binv = np.linalg.inv(self.A[:, self.basis])
        except np.linalg.LinAlgError:
            return False
        if not np.all(np.isfinite(self.binv)):
            return False
        nonbasic_x = self.x.copy()
        nonbasic_x[self.basis] = 0.0
        self.x[self.basis] = self.binv @ (self.b - self.A @ nonbasic_x)
        return True

    def start(self, warm: Optional[Basis]) -> None:
        if warm is not None:
            basic = [self._decode(code) for code in warm.basic]
            valid = (
                len(basic) == self.m
                and len(set(basic)) == self.m
                and all(0 <= j < self.nc + self.m for j in basic)
            )
            if valid:
                self.basis = np.asarray(basic, dtype=np.int64)
                upper = [self._decode(code) for code in warm.at_upper]
                self._place_nonbasic(u for u in upper if 0 <= u < self.nc + self.m)
                if self._refactor():
                    return
            logger.debug("lp.warm_start_rejected", rows=self.m, cols=self.nc)
        self.basis = np.arange(self.nc, self.nc + self.m)
        self._place_nonbasic()
        self._refactor()

    def run(self, warm: Optional[Basis] = None) -> LpSolution:
        self.start(warm)
        A, c, lb, ub = self.A, self.c, self.lb, self.ub
        tol_f, tol_d = self.tol_feas, self.tol_dual
        iterations = 0
        stall = 0
        bland = False
        is_basic = np.zeros(len(self.x), dtype=bool)

        while True:
            xb = self.x[self.basis]
            lb_b, ub_b = lb[self.basis], ub[self.basis]
            below = xb < lb_b - tol_f
            above = xb > ub_b + tol_f
            phase1 = bool(below.any() or above.any())

            if phase1:
                cost_b = above.astype(float) - below.astype(float)
                y = cost_b @ self.binv
                d = -(y @ A)
            else:
                y = c[self.basis] @ self.binv
                d = c - y @ A
            is_basic[:] = False
            is_basic[self.basis] = True
            d[is_basic] = 0.0

            can_up = (self.x < ub - tol_f) & (d < -tol_d)
            can_down = (self.x > lb + tol_f) & (d > tol_d)
            eligible = (can_up | can_down) & ~is_basic
            if not eligible.any():
                status: LpStatus = "infeasible" if phase1 else "optimal"
                return self._result(status, iterations, y if not phase1 else None)

            if iterations >= self.max_iterations:
                return self._result("iteration_limit", iterations, None)

            candidates = np.flatnonzero(eligible)
            if bland:
                j = int(candidates[0])
            else:
                j = int(candidates[np.argmax(np.abs(d[candidates]))])
            direction = 1.0 if d[j] < 0 else -1.0

            alpha = self.binv @ A[:, j]
            rate = -direction * alpha
            step, leave, target = self._ratio_test(xb, lb_b, ub_b, below, above, rate, bland)

            flip = ub[j] - lb[j]
            if leave < 0 and not math.isfinite(flip):
                if phase1:
                    return self._result("infeasible", iterations, None)
                return self._result("unbounded", iterations, None)

            iterations += 1
            if leave < 0 or flip <= step:
                self.x[j] = ub[j] if direction > 0 else lb[j]
                self.x[self.basis] = xb + rate * flip
                step = flip
            else:
                self.x[j] += direction * step
                self.x[self.basis] = xb + rate * step
                out = self.basis[leave]
                self.x[out] = target
                self.basis[leave] = j
                self._pivot(leave, alpha)
                if iterations % self.refactor_every == 0 and not self._refactor():
                    logger.warning("lp.singular_refactor", iteration=iterations)
                    self.basis = np.arange(self.nc, self.nc + self.m)
                    self._place_nonbasic()
                    self._refactor()

            if step <= STEP_TOL:
                stall += 1
                if stall > self.stall_threshold and not bland:
                    bland = True
                    logger.debug("lp.bland_on", iteration=iterations)
            else:
                stall = 0
                bland = False

    def _ratio_test(
        self,
        xb: np.ndarray,
        lb_b: np.ndarray,
        ub_b: np.ndarray,
        below: np.ndarray,
        above: np.ndarray,
        rate: np.ndarray,
        bland: bool,
    ) -> Tuple[float, int, float]:
        rising = rate > PIVOT_TOL
        falling = rate < -PIVOT_TOL
        # rising variables stop at lb if currently below it, else at ub
        target = np.full(len(xb), math.nan)
        target[rising] = np.where(below[rising], lb_b[rising], ub_b[rising])
        target[falling] = np.where(above[falling], ub_b[falling], lb_b[falling])
        blocked = (rising & ~above) | (falling & ~below)
        blocked &= np.isfinite(target)
        if not blocked.any():
            return math.inf, -1, math.nan
        idx = np.flatnonzero(blocked)
        steps = np.maximum((target[idx] - xb[idx]) / rate[idx], 0.0)
        best = steps.min()
        ties = idx[steps <= best + STEP_TOL]
        if bland:
            r = int(ties[np.argmin(self.basis[ties])])
        else:
            r = int(ties[np.argmax(np.abs(rate[ties]))])
        return float(best), r, float(target[r])

    def _pivot(self, r: int, alpha: np.ndarray) -> None:
        pivot_row = self.binv[r] / alpha[r]
        self.binv -= np.outer(alpha, pivot_row)
        self.binv[r] = pivot_row

    def _result(self, status: LpStatus, iterations: int, y: Optional[np.ndarray]) -> LpSolution:
        is_basic = np.zeros(len(self.x), dtype=bool)
        is_basic[self.basis] = True
        at_upper = [
            self._encode(j)
            for j in np.flatnonzero(~is_basic)
            if math.isfinite(self.ub[j]) and self.x[j] == self.ub[j] and self.ub[j] != self.lb[j]
        ]
        basis = Basis(basic=[self._encode(j) for j in self.basis], at_upper=at_upper)
        if status != "optimal":
            return LpSolution(status=status, iterations=iterations, basis=basis)
        d = self.c - y @ self.A
        d[is_basic] = 0.0
        x = self.x[: self.nc]
        return LpSolution(
            status=status,
            x=x.tolist(),
            duals=y.tolist(),
            reduced_costs=d[: self.nc].tolist(),
            objective=float(self.c[: self.nc] @ x),
            iterations=iterations,
            basis=basis,
        )


def solve_lp(
    problem: LpProblem,
    warm_basis: Optional[Basis] = None,
    tol_feas: float = 1e-7,
    tol_dual: float = 1e-7,
    max_iterations: int = 50_000,
    stall_threshold: int = 50,
    refactor_every: int = 64,
) -> LpSolution:
    """Solve an LP, optionally warm-started from a previous basis.

    Returns:
        LpSolution whose status is one of optimal, infeasible, unbounded or
        iteration_limit; primal values and duals are filled only when optimal.
    """
    if problem.n_rows == 0:
        unbounded = any(
            (c < 0 and math.isinf(hi)) or (c > 0 and math.isinf(lo))
            for c, lo, hi in zip(problem.objective, problem.lower, problem.upper)
        )
        if unbounded:
            return LpSolution(status="unbounded")
        x = []
        for c, lo, hi in zip(problem.objective, problem.lower, problem.upper):
            if c > 0 or (c == 0 and math.isfinite(lo)):
                x.append(lo)
            elif c < 0 or math.isfinite(hi):
                x.append(hi)
            else:
                x.append(0.0)
        return LpSolution(
            status="optimal",
            x=x,
            reduced_costs=list(problem.objective),
            objective=float(sum(c * v for c, v in zip(problem.objective, x))),
        )
    simplex = _BoundedSimplex(
        problem, tol_feas, tol_dual, max_iterations, stall_threshold, refactor_every
    )
    solution = simplex.run(warm_basis)
    logger.debug(
        "lp.solved",
        status=solution.status,
        rows=problem.n_rows,
        cols=problem.n_cols,
        iterations=solution.iterations,
    )
    return solution


class LpModel:
    """Mutable LP handle that warm-starts every solve from the last basis."""

    def __init__(self, problem: LpProblem, **options: float):
        self.problem = problem
        self.options = options
        self.basis: Optional[Basis] = None
        self.last: Optional[LpSolution] = None

    def add_column(self, *args, **kwargs) -> int:
        return self.problem.add_column(*args, **kwargs)

    def fix_variable_upper(self, var: int, new_upper: float) -> None:
        if not 0 <= var < self.problem.n_cols:
            raise InvalidParameterError(f"unknown variable {var}")
        if new_upper < self.problem.lower[var]:
            raise InvalidParameterError(
                f"upper bound {new_upper} below lower bound {self.problem.lower[var]}"
            )
        self.problem.upper[var] = float(new_upper)

    def solve(self) -> LpSolution:
        solution = solve_lp(self.problem, self.basis, **self.options)
        if solution.basis is not None:
            self.basis = solution.basis
        self.last = solution
        return solution


def fix_variable_upper(model: LpModel, var: int, new_upper: float) -> None:
    """Change a variable's upper bound in place; the next solve warm-starts.

    Raises:
        InvalidParameterError: If the new bound is below the lower bound.
    """
    model.fix_variable_upper(var, new_upper)
