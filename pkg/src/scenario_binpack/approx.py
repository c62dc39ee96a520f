#!/usr/bin/env python3
"""Approximation through vector bin packing.

A BPPS instance maps to a d-dimensional vector bin packing instance in which
item i consumes s_i in every dimension k of K_i and nothing elsewhere; both
problems then share their feasible bins. Packing the vector instance with
first fit and merging bins until no pair can be merged yields a BPPS solution
whose total bin count is at most sqrt(d) times its worst-case scenario count.
"""

from __future__ import annotations

import math
from functools import cached_property
from typing import Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .core import bin_loads, ensure_feasible, first_fit_pack, val_bpps, val_vbpp
from .exceptions import InvalidParameterError
from .models import Instance, Solution


class VbppInstance(BaseModel):
    """Vector bin packing instance with a uniform capacity per dimension."""

    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=0)
    d: int = Field(ge=1, description="Number of dimensions")
    capacity: int = Field(ge=1, description="Capacity W of every dimension")
    consumption: Tuple[Tuple[int, ...], ...] = Field(description="s_ik per item row")

    @model_validator(mode="after")
    def check_shape(self) -> VbppInstance:
        if len(self.consumption) != self.n:
            raise ValueError(f"expected {self.n} rows, got {len(self.consumption)}")
        for i, row in enumerate(self.consumption):
            if len(row) != self.d:
                raise ValueError(f"row {i} has {len(row)} entries, expected {self.d}")
            if any(not 0 <= v <= self.capacity for v in row):
                raise ValueError(f"row {i} has an entry outside [0, {self.capacity}]")
        return self

    @cached_property
    def matrix(self) -> np.ndarray:
        m = np.asarray(self.consumption, dtype=np.int64).reshape(self.n, self.d)
        m.setflags(write=False)
        return m

    def is_feasible(self, solution: Solution) -> bool:
        seen = [i for b in solution.bins for i in b]
        if sorted(seen) != list(range(self.n)) or any(not b for b in solution.bins):
            return False
        return all(
            (self.matrix[list(b)].sum(axis=0) <= self.capacity).all() for b in solution.bins
        )


def to_vbpp(instance: Instance) -> VbppInstance:
    """Map a BPPS instance to its vector bin packing counterpart."""
    return VbppInstance(
        n=instance.n,
        d=instance.d,
        capacity=instance.capacity,
        consumption=tuple(tuple(int(v) for v in row) for row in instance.consumption),
    )


def first_fit_vbpp(vbpp: VbppInstance, order: Optional[Sequence[int]] = None) -> Solution:
    """First fit over all dimensions.

    Args:
        vbpp: The vector instance.
        order: Item permutation; defaults to non-increasing largest entry,
            ties by index.
    """
    if order is None:
        peak = vbpp.matrix.max(axis=1) if vbpp.n else np.zeros(0, dtype=np.int64)
        order = sorted(range(vbpp.n), key=lambda i: (-int(peak[i]), i))
    elif sorted(order) != list(range(vbpp.n)):
        raise InvalidParameterError("order must be a permutation of the items")
    return Solution.from_bins(first_fit_pack(vbpp.matrix, vbpp.capacity, order))


def is_minimal(instance: Instance, solution: Solution) -> bool:
    """True when no two bins can be merged without breaking a scenario capacity."""
    loads = bin_loads(instance, solution.bins)
    for a in range(len(loads)):
        merged = loads[a] + loads[a + 1:]
        if (merged <= instance.capacity).all(axis=1).any():
            return False
    return True


def minimalize(instance: Instance, solution: Solution) -> Solution:
    """Merge mergeable bin pairs until the solution is minimal.

    Pairs are scanned in lexicographic bin-index order and the scan restarts
    after every merge; the merged bin takes the lower index.

    Raises:
        InfeasibleSolutionError: If the input is infeasible.
    """
    ensure_feasible(instance, solution)
    bins = [list(b) for b in solution.bins]
    loads = [row for row in bin_loads(instance, bins)]
    merged = True
    while merged:
        merged = False
        for a in range(len(bins)):
            for b in range(a + 1, len(bins)):
                if (loads[a] + loads[b] <= instance.capacity).all():
                    bins[a].extend(bins.pop(b))
                    loads[a] = loads[a] + loads.pop(b)
                    merged = True
                    break
            if merged:
                break
    return Solution.from_bins(bins)


def approx_solve(instance: Instance) -> Solution:
    """Vector mapping, first fit, then minimalization."""
    return minimalize(instance, first_fit_vbpp(to_vbpp(instance)))


def ratio_bound(d: int) -> float:
    """The sqrt(d) factor bounding val_vbpp / val_bpps on minimal solutions."""
    return math.sqrt(d)


def vbpp_bpps_ratio(instance: Instance, solution: Solution) -> float:
    """val_vbpp / val_bpps of a feasible, nonempty solution."""
    value = val_bpps(instance, solution)
    if value == 0:
        raise InvalidParameterError("ratio undefined for an empty solution")
    return val_vbpp(solution) / value


def build_ratio_worst_case(d: int, capacity: int = 100) -> Tuple[Instance, Solution]:
    """Worst case for the sqrt(d) ratio: full-size items, one scenario per pair.

    With r = ceil(sqrt(d)) items of size W and a scenario for every pair of
    items, singleton bins form a minimal solution using r bins in total but
    only 2 in any scenario. For d = 1 the single item gets scenario 0.

    Returns:
        The instance (d scenarios, the ones past r(r-1)/2 left empty) and the
        singleton reference solution.
    """
    if d < 1:
        raise InvalidParameterError(f"d must be >= 1, got {d}")
    r = math.isqrt(d)
    if r * r < d:
        r += 1
    scenarios = [set() for _ in range(r)]
    if r == 1:
        scenarios[0].add(0)
    else:
        for k, (i, j) in enumerate((i, j) for i in range(r) for j in range(i + 1, r)):
            scenarios[i].add(k)
            scenarios[j].add(k)
    instance = Instance(
        n=r,
        d=d,
        capacity=capacity,
        sizes=tuple([capacity] * r),
        scenarios=tuple(frozenset(s) for s in scenarios),
        name=f"ratio_worst_d{d}",
    )
    return instance, Solution.from_bins([[i] for i in range(r)])


# name used by the gen-theorem3 command
build_theorem3_instance = build_ratio_worst_case
