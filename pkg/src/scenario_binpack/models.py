#!/usr/bin/env python3
"""Pydantic models for bin packing with scenarios.

Instances, solutions, patterns and the records exchanged between solvers,
files and the benchmark harness. Item and scenario indices are 0-based.
"""

from __future__ import annotations

from functools import cached_property
from typing import Any, Dict, FrozenSet, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


class Instance(BaseModel):
    """A BPPS instance: n items with sizes and scenario sets, capacity W."""

    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=0, description="Number of items")
    d: int = Field(ge=1, description="Number of scenarios")
    capacity: int = Field(ge=1, description="Bin capacity W")
    sizes: Tuple[int, ...] = Field(description="Item sizes s_i")
    scenarios: Tuple[FrozenSet[int], ...] = Field(
        description="Scenario set K_i of every item"
    )
    name: Optional[str] = Field(default=None, description="Optional label")

    @model_validator(mode="after")
    def check_invariants(self) -> Instance:
        if len(self.sizes) != self.n or len(self.scenarios) != self.n:
            raise ValueError(
                f"expected {self.n} sizes and scenario sets, got "
                f"{len(self.sizes)} and {len(self.scenarios)}"
            )
        for i, (size, scen) in enumerate(zip(self.sizes, self.scenarios)):
            if not 1 <= size <= self.capacity:
                raise ValueError(
                    f"item {i}: size {size} outside [1, {self.capacity}]"
                )
            if not scen:
                raise ValueError(f"item {i}: empty scenario set")
            bad = [k for k in scen if not 0 <= k < self.d]
            if bad:
                raise ValueError(f"item {i}: scenario index {bad[0]} outside [0, {self.d})")
        return self

    @cached_property
    def membership(self) -> np.ndarray:
        """Boolean n x d matrix, True where item i belongs to scenario k."""
        m = np.zeros((self.n, self.d), dtype=bool)
        for i, scen in enumerate(self.scenarios):
            m[i, sorted(scen)] = True
        m.setflags(write=False)
        return m

    @cached_property
    def consumption(self) -> np.ndarray:
        """Integer n x d matrix of s_ik (s_i if k in K_i, else 0)."""
        c = self.membership.astype(np.int64) * np.asarray(self.sizes, dtype=np.int64)[:, None]
        c.setflags(write=False)
        return c

    def scenario_items(self, k: int) -> Tuple[int, ...]:
        """Items of scenario k (the set S_k)."""
        return tuple(int(i) for i in np.flatnonzero(self.membership[:, k]))

    def scenario_loads(self) -> np.ndarray:
        """Total size of every scenario's items."""
        return self.consumption.sum(axis=0)


class Solution(BaseModel):
    """A packing: bins as tuples of item indices, order preserved."""

    model_config = ConfigDict(frozen=True)

    bins: Tuple[Tuple[int, ...], ...] = Field(default=(), description="Item indices per bin")

    @classmethod
    def from_bins(cls, bins: Any) -> Solution:
        return cls(bins=tuple(tuple(int(i) for i in b) for b in bins))

    @property
    def n_bins(self) -> int:
        return len(self.bins)

    def canonical(self) -> FrozenSet[FrozenSet[int]]:
        """Partition as a set of sets, for order-free comparison."""
        return frozenset(frozenset(b) for b in self.bins)

    def item_bins(self) -> Dict[int, int]:
        """Map item -> bin index (last occurrence wins)."""
        return {i: b for b, items in enumerate(self.bins) for i in items}


class Pattern(BaseModel):
    """A single-bin item set with its touched scenarios (a master column)."""

    model_config = ConfigDict(frozen=True)

    items: FrozenSet[int] = Field(description="Packed items (a_ip = 1)")
    touched_scenarios: FrozenSet[int] = Field(description="Scenarios with b_kp = 1")

    @classmethod
    def from_items(cls, instance: Instance, items: Any) -> Pattern:
        items = frozenset(int(i) for i in items)
        touched: set[int] = set()
        for i in items:
            touched |= instance.scenarios[i]
        return cls(items=items, touched_scenarios=frozenset(touched))

    def loads(self, instance: Instance) -> np.ndarray:
        if not self.items:
            return np.zeros(instance.d, dtype=np.int64)
        return instance.consumption[sorted(self.items)].sum(axis=0)

    def is_feasible(self, instance: Instance) -> bool:
        expected = Pattern.from_items(instance, self.items).touched_scenarios
        return (
            bool((self.loads(instance) <= instance.capacity).all())
            and expected == self.touched_scenarios
        )


class Violation(BaseModel):
    """One reason a solution is infeasible."""

    kind: Literal["unknown_item", "duplicate", "missing", "empty_bin", "capacity"]
    bin: Optional[int] = Field(default=None, description="Offending bin")
    item: Optional[int] = Field(default=None, description="Offending item")
    scenario: Optional[int] = Field(default=None, description="Overloaded scenario")
    load: Optional[int] = Field(default=None, description="Scenario load in the bin")
    overload: Optional[int] = Field(default=None, description="Load above capacity")

    def describe(self) -> str:
        if self.kind == "capacity":
            return (
                f"bin {self.bin} scenario {self.scenario}: load {self.load} "
                f"exceeds capacity by {self.overload}"
            )
        if self.kind == "empty_bin":
            return f"bin {self.bin} is empty"
        if self.kind == "missing":
            return f"item {self.item} is not packed"
        if self.kind == "duplicate":
            return f"item {self.item} packed again in bin {self.bin}"
        return f"bin {self.bin} holds unknown item {self.item}"


class ValidationReport(BaseModel):
    """Outcome of a feasibility check."""

    violations: List[Violation] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def summary(self) -> str:
        if self.ok:
            return "ok"
        head = "; ".join(v.describe() for v in self.violations[:3])
        more = len(self.violations) - 3
        return head + (f"; and {more} more" if more > 0 else "")


class SolutionRecord(BaseModel):
    """Machine-readable result of one solver run."""

    instance: Optional[str] = Field(default=None, description="Instance name or path")
    algorithm: str = Field(description="Algorithm that produced the bins")
    bins: List[List[int]] = Field(description="Item indices per bin")
    val_bpps: int = Field(ge=0, description="Worst-case scenario bin count")
    val_vbpp: int = Field(ge=0, description="Total bin count")
    time_s: float = Field(ge=0, description="Wall-clock seconds")
    status: Literal["optimal", "gap"] = Field(description="Proof status")
    lower_bound: Optional[int] = Field(default=None, description="Proven lower bound")
    metadata: Dict[str, Any] = Field(default_factory=dict, description="Solver stats")

    def to_solution(self) -> Solution:
        return Solution.from_bins(self.bins)
