#!/usr/bin/env python3
"""Pricing for the scenario master problem.

Given item duals alpha (>= 0) and scenario duals beta (<= 0), pricing finds a
feasible bin maximizing sum(alpha_i) + sum(beta_k over touched scenarios).
This is a knapsack problem with scenarios, solved here by depth-first branch
and bound over pseudo-items (groups of items merged by branching) with the
bound "current value plus the remaining positive alpha".
"""

from __future__ import annotations

import time
from typing import List, Optional, Sequence

import numpy as np
import structlog
from pydantic import BaseModel, Field

from .branching import BranchState
from .models import Instance, Pattern

logger = structlog.get_logger(__name__)

VALUE_EPS = 1e-9


class DualSolution(BaseModel):
    """Master duals: alpha per item row, beta per scenario row."""

    alpha: List[float]
    beta: List[float]

    @classmethod
    def from_row_duals(cls, duals: Sequence[float], n: int, d: int) -> DualSolution:
        """Split and clamp row duals to their valid signs (alpha >= 0, beta <= 0)."""
        y = np.asarray(duals, dtype=float)
        return cls(
            alpha=[float(v) for v in np.maximum(y[:n], 0.0)],
            beta=[float(v) for v in np.minimum(y[n:n + d], 0.0)],
        )

    def value(self, instance: Instance, items: Sequence[int]) -> float:
        """Reduced-cost gain of the bin holding exactly these items."""
        pattern = Pattern.from_items(instance, items)
        return float(
            sum(self.alpha[i] for i in pattern.items)
            + sum(self.beta[k] for k in pattern.touched_scenarios)
        )


class PricingResult(BaseModel):
    """Best bin found; ``exact`` is False when the search was cut short."""

    pattern: Optional[Pattern] = None
    value: float = 0.0
    exact: bool = True
    nodes: int = Field(default=0, ge=0)


class _Search:
    def __init__(
        self,
        alpha: np.ndarray,
        loads: np.ndarray,
        masks: np.ndarray,
        conflicts: np.ndarray,
        beta: np.ndarray,
        capacity: int,
        node_limit: int,
        deadline: Optional[float],
    ):
        self.alpha = alpha
        self.loads = loads
        self.masks = masks
        self.conflicts = conflicts
        self.beta = beta
        self.capacity = capacity
        self.node_limit = node_limit
        self.deadline = deadline
        self.suffix = np.concatenate([np.cumsum(alpha[::-1])[::-1], [0.0]])
        self.best_value = 0.0
        self.best: List[int] = []
        self.nodes = 0
        self.truncated = False

    def run(self) -> None:
        d = self.loads.shape[1] if self.loads.size else self.beta.size
        self._visit(
            0,
            0.0,
            np.zeros(d, dtype=np.int64),
            np.zeros(d, dtype=bool),
            np.zeros(len(self.alpha), dtype=bool),
            [],
        )

    def _visit(
        self,
        idx: int,
        value: float,
        load: np.ndarray,
        touched: np.ndarray,
        blocked: np.ndarray,
        chosen: List[int],
    ) -> None:
        if self.truncated:
            return
        self.nodes += 1
        if self.nodes >= self.node_limit or (
            self.deadline is not None and self.nodes % 1024 == 0 and time.perf_counter() > self.deadline
        ):
            self.truncated = True
            return
        if value > self.best_value + VALUE_EPS:
            self.best_value = value
            self.best = list(chosen)
        for g in range(idx, len(self.alpha)):
            if value + self.suffix[g] <= self.best_value + VALUE_EPS:
                return
            if blocked[g]:
                continue
            new_load = load + self.loads[g]
            if (new_load > self.capacity).any():
                continue
            fresh = self.masks[g] & ~touched
            gain = self.alpha[g] + float(self.beta[fresh].sum())
            chosen.append(g)
            self._visit(
                g + 1,
                value + gain,
                new_load,
                touched | self.masks[g],
                blocked | self.conflicts[g],
                chosen,
            )
            chosen.pop()
            if self.truncated:
                return


def price(
    instance: Instance,
    duals: DualSolution,
    state: Optional[BranchState] = None,
    node_limit: int = 2_000_000,
    deadline: Optional[float] = None,
) -> PricingResult:
    """Find a feasible bin of maximum reduced-cost gain under the branch state.

    The returned pattern respects every together/apart decision of ``state``.
    A value above zero means the column has negative reduced cost in the
    master. When ``exact`` is False the node or time cap was hit and the
    value is only a lower estimate of the true maximum.
    """
    state = state or BranchState.root(instance.n)
    alpha = np.maximum(np.asarray(duals.alpha, dtype=float), 0.0)
    beta = np.minimum(np.asarray(duals.beta, dtype=float), 0.0)

    groups = state.groups()
    group_alpha = np.array([alpha[list(g)].sum() for g in groups]) if groups else np.zeros(0)
    group_load = state.group_loads(instance) if groups else np.zeros((0, instance.d), dtype=np.int64)
    group_mask = group_load > 0

    fits = (group_load <= instance.capacity).all(axis=1)
    keep = [g for g in range(len(groups)) if group_alpha[g] > VALUE_EPS and fits[g]]
    keep.sort(key=lambda g: (-group_alpha[g], groups[g][0]))

    position = {groups[g][0]: p for p, g in enumerate(keep)}
    conflicts = np.zeros((len(keep), len(keep)), dtype=bool)
    for a, b in state.apart_groups():
        if a in position and b in position:
            conflicts[position[a], position[b]] = True
            conflicts[position[b], position[a]] = True

    search = _Search(
        group_alpha[keep],
        group_load[keep],
        group_mask[keep],
        conflicts,
        beta,
        instance.capacity,
        node_limit,
        deadline,
    )
    search.run()

    if search.truncated:
        logger.debug("pricing.truncated", nodes=search.nodes, best=search.best_value)
    if not search.best:
        return PricingResult(value=0.0, exact=not search.truncated, nodes=search.nodes)
    items = [i for p in search.best for i in groups[keep[p]]]
    return PricingResult(
        pattern=Pattern.from_items(instance, items),
        value=search.best_value,
        exact=not search.truncated,
        nodes=search.nodes,
    )
