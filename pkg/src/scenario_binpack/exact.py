#!/usr/bin/env python3
"""Exact solution by branch and price.

The master problem selects bins (patterns) so that every item is covered and
the number of selected bins touching any scenario stays below F, minimizing F.
Column generation solves its LP relaxation at every node; Ryan-Foster
branching on item pairs (together / apart) closes the integrality gap, and a
small restricted master IP over the current column pool supplies incumbents.
"""

from __future__ import annotations

import heapq
import itertools
import math
import time
from typing import Dict, FrozenSet, Iterable, List, Literal, Optional, Sequence, Tuple

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field

from .bounds import lb_root
from .branching import BranchState
from .core import check_feasible, val_bpps
from .exceptions import SolverError
from .heuristic import ffd_construct
from .lp import LpModel, LpProblem, LpSolution
from .models import Instance, Pattern, Solution
from .pricing import DualSolution, price

logger = structlog.get_logger(__name__)

CG_TOL = 1e-6
INTEGRALITY_TOL = 1e-6
LB_EPS = 1e-6


class Column(BaseModel):
    """A pattern in the master, with its variable index."""

    model_config = ConfigDict(frozen=True)

    id: int = Field(ge=0, description="Position in the pool")
    pattern: Pattern

    @property
    def items(self) -> FrozenSet[int]:
        return self.pattern.items

    @property
    def var(self) -> int:
        # variable 0 is F
        return self.id + 1


class BranchAndPriceConfig(BaseModel):
    """Limits and options of the branch-and-price search."""

    time_limit: float = Field(default=120.0, gt=0, description="Wall-clock limit (s)")
    warm_columns: bool = Field(
        default=True, description="Seed the pool with the warm start's bins"
    )
    rmp_ip_time_limit: float = Field(default=2.0, gt=0)
    rmp_ip_node_limit: int = Field(default=100_000, gt=0)
    pricing_node_limit: int = Field(default=2_000_000, gt=0)
    lp_options: Dict[str, float] = Field(default_factory=dict)

    @classmethod
    def from_settings(cls, settings) -> BranchAndPriceConfig:
        return cls(
            time_limit=settings.bp_time_limit,
            rmp_ip_time_limit=settings.rmp_ip_time_limit,
            rmp_ip_node_limit=settings.rmp_ip_node_limit,
            pricing_node_limit=settings.pricing_node_limit,
            lp_options=dict(
                tol_feas=settings.lp_tol_feas,
                tol_dual=settings.lp_tol_dual,
                max_iterations=settings.lp_max_iterations,
                stall_threshold=settings.lp_stall_threshold,
                refactor_every=settings.lp_refactor_every,
            ),
        )


class SearchStats(BaseModel):
    """Outcome and counters of a branch-and-price run."""

    status: Literal["optimal", "gap"] = "gap"
    ub: int = 0
    lb: int = 0
    gap: float = 0.0
    nodes: int = 0
    columns_generated: int = Field(default=0, description="Columns added after the initial pool")
    total_columns: int = 0
    root_lb: int = 0
    root_lp: Optional[float] = None
    rmp_ip_calls: int = 0
    time_s: float = 0.0
    ub_history: List[Tuple[float, int]] = Field(
        default_factory=list, description="(elapsed s, upper bound) on every improvement"
    )


class ColumnPool:
    """The master LP and its columns.

    Rows 0..n-1 are item covering rows (>= 1), rows n..n+d-1 scenario rows
    (sum of touching columns - F <= 0). Variable 0 is F in [0, n]; column p is
    variable p + 1 in [0, inf), its upper bound dropped to 0 when a branching
    decision forbids it. A bound of 1 would let a pooled column sit at its
    bound with an improving reduced cost, which pricing cannot add again.
    """

    def __init__(self, instance: Instance, **lp_options: float):
        self.instance = instance
        n, d = instance.n, instance.d
        problem = LpProblem(
            objective=[1.0],
            columns=[(list(range(n, n + d)), [-1.0] * d)],
            senses=[">="] * n + ["<="] * d,
            rhs=[1.0] * n + [0.0] * d,
            lower=[0.0],
            upper=[float(n)],
        )
        self.model = LpModel(problem, **lp_options)
        self.columns: List[Column] = []
        self._index: Dict[FrozenSet[int], int] = {}

    def __len__(self) -> int:
        return len(self.columns)

    def __contains__(self, items: Iterable[int]) -> bool:
        return frozenset(items) in self._index

    def add(self, pattern: Pattern) -> Tuple[Column, bool]:
        """Add a pattern unless an identical item set is already pooled."""
        if pattern.items in self._index:
            return self.columns[self._index[pattern.items]], False
        if not pattern.items or not pattern.is_feasible(self.instance):
            raise SolverError(f"infeasible pattern {sorted(pattern.items)}")
        n = self.instance.n
        rows = sorted(pattern.items) + [n + k for k in sorted(pattern.touched_scenarios)]
        self.model.add_column(0.0, rows, [1.0] * len(rows), 0.0, math.inf)
        column = Column(id=len(self.columns), pattern=pattern)
        self.columns.append(column)
        self._index[pattern.items] = column.id
        return column, True

    def add_items(self, items: Iterable[int]) -> Tuple[Column, bool]:
        return self.add(Pattern.from_items(self.instance, items))

    def apply(self, state: BranchState) -> List[int]:
        """Set column bounds for the node; returns the ids of fixed columns."""
        fixed = []
        for column in self.columns:
            allowed = state.allows(column.items)
            self.model.fix_variable_upper(column.var, math.inf if allowed else 0.0)
            if not allowed:
                fixed.append(column.id)
        return fixed


class RmpSolution(BaseModel):
    """Restricted master LP optimum in column terms."""

    status: str
    objective: float = math.nan
    x: List[float] = Field(default_factory=list, description="Value per pool column")
    duals: Optional[DualSolution] = None

    def support(self) -> List[int]:
        return [p for p, v in enumerate(self.x) if v > INTEGRALITY_TOL]

    def is_integral(self) -> bool:
        return all(abs(v - round(v)) < INTEGRALITY_TOL for v in self.x)


class NodeResult(BaseModel):
    """Column generation outcome at one node."""

    infeasible: bool = False
    proven: bool = Field(default=True, description="LP optimum proven by exact pricing")
    lp_value: float = math.nan
    lower_bound: int = 0
    iterations: int = 0
    columns_added: int = 0
    rmp: Optional[RmpSolution] = None


def build_initial_columns(
    instance: Instance,
    warm_start: Optional[Solution] = None,
    add_warm_columns: bool = True,
    **lp_options: float,
) -> ColumnPool:
    """Singleton columns plus, optionally, the bins of a warm start."""
    pool = ColumnPool(instance, **lp_options)
    for i in range(instance.n):
        pool.add_items([i])
    if warm_start is not None and add_warm_columns:
        for b in warm_start.bins:
            pool.add_items(b)
    return pool


def solve_rmp(pool: ColumnPool) -> RmpSolution:
    """Solve the restricted master LP under the current column bounds."""
    lp: LpSolution = pool.model.solve()
    if lp.status != "optimal":
        return RmpSolution(status=lp.status)
    n, d = pool.instance.n, pool.instance.d
    return RmpSolution(
        status="optimal",
        objective=lp.objective,
        x=lp.x[1:],
        duals=DualSolution.from_row_duals(lp.duals, n, d),
    )


def column_generation(
    pool: ColumnPool,
    state: BranchState,
    config: Optional[BranchAndPriceConfig] = None,
    deadline: Optional[float] = None,
) -> NodeResult:
    """Alternate master solves and pricing until no improving column exists.

    The node lower bound is ceil(F* - 1e-6); it is only reported as proven
    when the last pricing call was exact.
    """
    config = config or BranchAndPriceConfig()
    instance = pool.instance
    pool.apply(state)
    iterations = added = 0
    while True:
        iterations += 1
        rmp = solve_rmp(pool)
        if rmp.status == "infeasible":
            return NodeResult(infeasible=True, iterations=iterations, columns_added=added)
        if rmp.status != "optimal":
            logger.warning("cg.lp_failed", status=rmp.status)
            return NodeResult(proven=False, iterations=iterations, columns_added=added)
        if deadline is not None and time.perf_counter() > deadline:
            proven = False
            break
        result = price(instance, rmp.duals, state, config.pricing_node_limit, deadline)
        if result.pattern is not None and result.value > CG_TOL:
            _, is_new = pool.add(result.pattern)
            if is_new:
                added += 1
                continue
            # the master already holds it at a non-optimal value
            logger.warning("cg.duplicate_column", value=result.value)
            proven = False
            break
        proven = result.exact
        break
    return NodeResult(
        proven=proven,
        lp_value=rmp.objective,
        lower_bound=math.ceil(rmp.objective - LB_EPS),
        iterations=iterations,
        columns_added=added,
        rmp=rmp,
    )


def find_branch_pair(
    pool: ColumnPool, rmp: RmpSolution, state: Optional[BranchState] = None
) -> Optional[Tuple[int, int]]:
    """Pick the item pair whose co-packing flow is closest to 0.5.

    Flows are computed between pseudo-items (groups already merged); pairs are
    reported by their smallest members, ties broken lexicographically. None
    when every flow is integral.
    """
    state = state or BranchState.root(pool.instance.n)
    flows: Dict[Tuple[int, int], float] = {}
    for p in rmp.support():
        reps = sorted({state.rep[i] for i in pool.columns[p].items})
        for a, b in itertools.combinations(reps, 2):
            flows[(a, b)] = flows.get((a, b), 0.0) + rmp.x[p]
    best: Optional[Tuple[float, Tuple[int, int]]] = None
    for pair, flow in flows.items():
        frac = flow - math.floor(flow)
        if INTEGRALITY_TOL < frac < 1 - INTEGRALITY_TOL:
            key = (abs(frac - 0.5), pair)
            if best is None or key < best:
                best = key
    return None if best is None else best[1]


def _repair(columns: Sequence[FrozenSet[int]]) -> Solution:
    """Turn a cover into a partition by dropping repeated items from later bins."""
    seen: set[int] = set()
    bins = []
    for items in columns:
        kept = sorted(i for i in items if i not in seen)
        seen.update(kept)
        if kept:
            bins.append(kept)
    return Solution.from_bins(bins)


def restricted_master_ip(
    pool: ColumnPool,
    state: BranchState,
    incumbent: Optional[int] = None,
    target: int = 0,
    time_limit: float = 2.0,
    node_limit: int = 100_000,
) -> Optional[Solution]:
    """Search the allowed pool columns for a cover beating the incumbent.

    Depth-first: the uncovered item with the fewest covering columns is
    covered next; a branch is cut when some scenario's count plus the bins
    its uncovered load still needs reaches the incumbent. Overlapping bins
    are repaired afterwards. Stops at ``target`` or the time/node budget.

    Returns:
        The best feasible solution found, or None if none beats ``incumbent``.
    """
    instance = pool.instance
    n, d, W = instance.n, instance.d, instance.capacity
    allowed = [c for c in pool.columns if state.allows(c.items)]
    best_value = incumbent if incumbent is not None else n + 1
    if not allowed or best_value <= target:
        return None
    touched = np.zeros((len(allowed), d), dtype=np.int64)
    for p, c in enumerate(allowed):
        touched[p, sorted(c.pattern.touched_scenarios)] = 1
    covering: List[List[int]] = [[] for _ in range(n)]
    for p, c in enumerate(allowed):
        for i in c.items:
            covering[i].append(p)
    if any(not cov for cov in covering):
        return None
    order = sorted(range(n), key=lambda i: (len(covering[i]), -instance.sizes[i], i))
    consumption = instance.consumption

    deadline = time.perf_counter() + time_limit
    best: Optional[List[int]] = None
    nodes = 0
    stop = False

    def visit(covered: np.ndarray, counts: np.ndarray, remaining: np.ndarray, chosen: List[int]) -> None:
        nonlocal best, best_value, nodes, stop
        nodes += 1
        if nodes >= node_limit or (nodes % 512 == 0 and time.perf_counter() > deadline):
            stop = True
            return
        need = counts + -(-remaining // W)
        if need.max(initial=0) >= best_value:
            return
        pick = next((i for i in order if not covered[i]), None)
        if pick is None:
            best_value = int(counts.max(initial=0))
            best = list(chosen)
            if best_value <= target:
                stop = True
            return
        options = sorted(
            covering[pick], key=lambda p: (-sum(1 for i in allowed[p].items if not covered[i]), p)
        )
        for p in options:
            new_counts = counts + touched[p]
            if new_counts.max(initial=0) >= best_value:
                continue
            fresh = [i for i in allowed[p].items if not covered[i]]
            new_covered = covered.copy()
            new_covered[fresh] = True
            chosen.append(p)
            visit(new_covered, new_counts, remaining - consumption[fresh].sum(axis=0), chosen)
            chosen.pop()
            if stop:
                return

    visit(
        np.zeros(n, dtype=bool),
        np.zeros(d, dtype=np.int64),
        instance.scenario_loads().astype(np.int64),
        [],
    )
    logger.debug("rmp_ip.done", nodes=nodes, best=best_value if best is not None else None)
    if best is None:
        return None
    solution = _repair([allowed[p].items for p in best])
    report = check_feasible(instance, solution)
    if not report.ok:
        raise SolverError(f"restricted master IP produced an infeasible packing: {report.summary()}")
    return solution


def _ensure_group_columns(pool: ColumnPool, state: BranchState) -> None:
    for group in state.groups():
        if len(group) > 1 and group not in pool and state.group_feasible(pool.instance, group):
            pool.add_items(group)


def branch_and_price(
    instance: Instance,
    warm_start: Optional[Solution] = None,
    config: Optional[BranchAndPriceConfig] = None,
) -> Tuple[Solution, SearchStats]:
    """Solve BPPS to optimality or until the time limit.

    Best-bound node selection (ties go to the deeper node). The incumbent
    starts from ``warm_start`` or first-fit decreasing; the root bound is at
    least the continuous and dual-feasible-function bounds.

    Returns:
        The incumbent solution and search statistics. ``status`` is
        "optimal" when the lower bound meets the incumbent, else "gap" with
        gap = (ub - lb) / ub.
    """
    config = config or BranchAndPriceConfig()
    start = time.perf_counter()
    deadline = start + config.time_limit
    log = logger.bind(instance=instance.name, n=instance.n, d=instance.d)

    incumbent = warm_start if warm_start is not None else ffd_construct(instance)
    ub = val_bpps(instance, incumbent)
    stats = SearchStats(ub=ub, ub_history=[(0.0, ub)])
    root_bound = lb_root(instance)
    stats.root_lb = root_bound

    pool = build_initial_columns(instance, warm_start, config.warm_columns, **config.lp_options)
    initial_columns = len(pool)

    def improve(solution: Solution) -> None:
        nonlocal incumbent, ub
        value = val_bpps(instance, solution)
        if value < ub:
            incumbent, ub = solution, value
            stats.ub_history.append((time.perf_counter() - start, ub))
            log.info("bp.incumbent", ub=ub, nodes=stats.nodes)

    counter = itertools.count()
    heap: List[Tuple[int, int, int, BranchState]] = []
    if instance.n and root_bound < ub:
        heap.append((root_bound, 0, next(counter), BranchState.root(instance.n)))
    unresolved: List[int] = []

    while heap:
        if time.perf_counter() > deadline:
            log.info("bp.time_limit", nodes=stats.nodes)
            break
        bound, _, _, state = heapq.heappop(heap)
        if bound >= ub:
            heap.clear()
            break
        stats.nodes += 1
        _ensure_group_columns(pool, state)
        result = column_generation(pool, state, config, deadline)
        if result.infeasible:
            continue
        node_lb = max(bound, result.lower_bound) if result.proven else bound
        if stats.nodes == 1:
            stats.root_lp = result.lp_value
            log.info("bp.root", lp=result.lp_value, lb=node_lb, columns=len(pool))
        rmp = result.rmp
        if rmp is not None and rmp.is_integral():
            improve(_repair([pool.columns[p].items for p in rmp.support()]))
        if node_lb >= ub:
            continue
        if rmp is not None:
            stats.rmp_ip_calls += 1
            ip = restricted_master_ip(
                pool,
                state,
                incumbent=ub,
                target=node_lb,
                time_limit=min(config.rmp_ip_time_limit, max(deadline - time.perf_counter(), 0.0)),
                node_limit=config.rmp_ip_node_limit,
            )
            if ip is not None:
                improve(ip)
        if node_lb >= ub:
            continue
        if rmp is None:
            log.warning("bp.node_open", lb=node_lb, reason="lp")
            unresolved.append(node_lb)
            continue
        if not result.proven:
            # children keep the parent bound
            log.info("bp.node_unproven", lb=node_lb, lp=result.lp_value)
        pair = find_branch_pair(pool, rmp, state)
        if pair is None:
            # integral pair flows over an over-covered support
            support = sorted(rmp.support(), key=lambda p: (-rmp.x[p], p))
            improve(_repair([pool.columns[p].items for p in support]))
            if node_lb >= ub:
                continue
            log.warning("bp.node_open", lb=node_lb, reason="no_branch_pair")
            unresolved.append(node_lb)
            continue
        l, m = pair
        for child in (state.together(l, m, instance), state.separate(l, m)):
            if child is not None:
                heapq.heappush(heap, (node_lb, -child.depth, next(counter), child))

    open_bounds = [b for b, *_ in heap] + unresolved
    lb = min([ub] + open_bounds)
    lb = max(min(lb, ub), min(root_bound, ub))
    stats.ub = ub
    stats.lb = lb
    stats.status = "optimal" if lb >= ub else "gap"
    stats.gap = 0.0 if ub == 0 else (ub - lb) / ub
    stats.total_columns = len(pool)
    stats.columns_generated = len(pool) - initial_columns
    stats.time_s = time.perf_counter() - start
    log.info(
        "bp.done",
        status=stats.status,
        ub=ub,
        lb=lb,
        nodes=stats.nodes,
        columns=stats.total_columns,
        time_s=round(stats.time_s, 3),
    )
    return incumbent, stats
