#!/usr/bin/env python3
"""Feasibility and objective evaluation for BPPS solutions."""

from __future__ import annotations

from typing import Iterable, List

import numpy as np

from .exceptions import InfeasibleSolutionError
from .models import Instance, Solution, ValidationReport, Violation


def bin_loads(instance: Instance, bins: Iterable[Iterable[int]]) -> np.ndarray:
    """Per-bin, per-scenario loads as a (bins x d) integer matrix."""
    rows: List[np.ndarray] = []
    for b in bins:
        items = list(b)
        if items:
            rows.append(instance.consumption[items].sum(axis=0))
        else:
            rows.append(np.zeros(instance.d, dtype=np.int64))
    if not rows:
        return np.zeros((0, instance.d), dtype=np.int64)
    return np.vstack(rows)


def check_feasible(instance: Instance, solution: Solution) -> ValidationReport:
    """Check the partition property and every per-scenario capacity.

    Returns:
        ValidationReport listing each violation; never raises.
    """
    violations: List[Violation] = []
    seen: set[int] = set()
    valid_bins: List[List[int]] = []
    for b, items in enumerate(solution.bins):
        if not items:
            violations.append(Violation(kind="empty_bin", bin=b))
        kept = []
        for i in items:
            if not 0 <= i < instance.n:
                violations.append(Violation(kind="unknown_item", bin=b, item=i))
                continue
            if i in seen:
                violations.append(Violation(kind="duplicate", bin=b, item=i))
            seen.add(i)
            kept.append(i)
        valid_bins.append(kept)
    for i in range(instance.n):
        if i not in seen:
            violations.append(Violation(kind="missing", item=i))

    loads = bin_loads(instance, valid_bins)
    over = np.argwhere(loads > instance.capacity)
    for b, k in over:
        load = int(loads[b, k])
        violations.append(
            Violation(
                kind="capacity",
                bin=int(b),
                scenario=int(k),
                load=load,
                overload=load - instance.capacity,
            )
        )
    return ValidationReport(violations=violations)


def ensure_feasible(instance: Instance, solution: Solution) -> None:
    """Raise InfeasibleSolutionError unless the solution is feasible."""
    report = check_feasible(instance, solution)
    if not report.ok:
        raise InfeasibleSolutionError(report)


def scenario_bin_counts(instance: Instance, solution: Solution) -> np.ndarray:
    """Number of bins touching each scenario (|B_k|)."""
    loads = bin_loads(instance, solution.bins)
    return (loads > 0).sum(axis=0)


def val_bpps(instance: Instance, solution: Solution) -> int:
    """Worst-case scenario bin count: max_k |{B : B meets S_k}|.

    Raises:
        InfeasibleSolutionError: If the solution is infeasible.
    """
    ensure_feasible(instance, solution)
    if not solution.bins:
        return 0
    return int(scenario_bin_counts(instance, solution).max(initial=0))


def val_vbpp(solution: Solution) -> int:
    """Total number of bins."""
    return len(solution.bins)


def singleton_solution(instance: Instance) -> Solution:
    """One item per bin; always feasible."""
    return Solution.from_bins([[i] for i in range(instance.n)])


def first_fit_pack(
    consumption: np.ndarray, capacity: int, order: Iterable[int]
) -> List[List[int]]:
    """Pack items in the given order into the lowest-index bin that fits.

    ``consumption`` is an (items x dimensions) matrix; a bin fits an item when
    every dimension stays within ``capacity`` after adding it.
    """
    order = list(order)
    n_dims = consumption.shape[1]
    loads = np.zeros((max(len(order), 1), n_dims), dtype=np.int64)
    bins: List[List[int]] = []
    for i in order:
        row = consumption[i]
        if bins:
            fits = np.flatnonzero((loads[: len(bins)] + row <= capacity).all(axis=1))
        else:
            fits = np.empty(0, dtype=np.int64)
        if fits.size:
            b = int(fits[0])
            bins[b].append(int(i))
        else:
            b = len(bins)
            bins.append([int(i)])
        loads[b] += row
    return bins
