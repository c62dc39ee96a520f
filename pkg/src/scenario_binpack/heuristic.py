#!/usr/bin/env python3
"""First-fit decreasing and variable neighborhood search.

Four neighborhood structures drive the search:

* N1 ``swap``: exchange two items packed in different bins.
* N2 ``relocate``: move one item to another bin (or to a fresh bin).
* N3 ``split-pair``: move two items of one bin to two target bins.
* N4 ``dissolve-bin``: drop a bin and first-fit its items into the rest.

Solutions are ranked with an exact rational fitness that rewards full bins,
so that moves which keep the worst-case bin count can still be told apart.
"""

from __future__ import annotations

import time
from enum import Enum
from fractions import Fraction
from itertools import combinations
from typing import Dict, Iterator, List, NamedTuple, Optional, Tuple

import numpy as np
import structlog
from pydantic import BaseModel, Field

from .core import bin_loads, ensure_feasible, first_fit_pack
from .exceptions import InvalidParameterError
from .generator import make_rng
from .models import Instance, Solution

logger = structlog.get_logger(__name__)

FRESH = -1


class MoveKind(str, Enum):
    SWAP = "swap"
    RELOCATE = "relocate"
    SPLIT_PAIR = "split-pair"
    DISSOLVE = "dissolve-bin"


KIND_BY_KAPPA = {
    1: MoveKind.SWAP,
    2: MoveKind.RELOCATE,
    3: MoveKind.SPLIT_PAIR,
    4: MoveKind.DISSOLVE,
}


class Move(NamedTuple):
    """A neighborhood move.

    Operands by kind (bin targets may be ``FRESH``):
        swap: (i, j); relocate: (i, target); split-pair: (b1, i, j, t2, t3);
        dissolve-bin: (b,).
    """

    kind: MoveKind
    operands: Tuple[int, ...]


class VnsConfig(BaseModel):
    """VNS parameters."""

    n_max: int = Field(default=4, ge=4, le=4, description="Neighborhood count")
    t_max: float = Field(default=1800.0, gt=0, description="Wall-clock limit (s)")
    c_max: int = Field(default=500, gt=0, description="Non-improving iteration limit")
    seed: int = Field(default=0, ge=0, description="Shake PRNG seed")

    @classmethod
    def from_settings(cls, settings) -> VnsConfig:
        return cls(t_max=settings.vns_t_max, c_max=settings.vns_c_max, seed=settings.seed)


class VnsStats(BaseModel):
    iterations: int = 0
    improvements: int = 0
    time_s: float = 0.0
    history: List[Tuple[int, int]] = Field(
        default_factory=list, description="(iteration, best val_bpps) on every change"
    )


def _fitness(counts: np.ndarray, sq: np.ndarray, capacity: int) -> Fraction:
    used = counts > 0
    if not used.any():
        return Fraction(0)
    penalty = Fraction(0)
    for c in np.unique(counts[used]):
        total = int(sq[counts == c].sum())
        penalty += Fraction(total, int(c) * int(c))
    return int(counts.max()) - penalty / (capacity * capacity)


class _Delta(NamedTuple):
    changed: Dict[int, Tuple[List[int], np.ndarray]]
    added: List[Tuple[List[int], np.ndarray]]


class _Packing:
    """Working representation: bins, per-bin loads and per-scenario aggregates."""

    __slots__ = ("instance", "bins", "loads", "counts", "sq", "where", "_fit")

    def __init__(self, instance: Instance, bins: List[List[int]], loads: np.ndarray):
        self.instance = instance
        self.bins = bins
        self.loads = loads
        self.counts = (loads > 0).sum(axis=0)
        self.sq = (loads * loads).sum(axis=0)
        self.where = np.empty(instance.n, dtype=np.int64)
        for b, items in enumerate(bins):
            self.where[items] = b
        self._fit: Optional[Fraction] = None

    @classmethod
    def from_solution(cls, instance: Instance, solution: Solution) -> _Packing:
        bins = [list(b) for b in solution.bins if b]
        return cls(instance, bins, bin_loads(instance, bins))

    def to_solution(self) -> Solution:
        return Solution.from_bins(self.bins)

    @property
    def fitness(self) -> Fraction:
        if self._fit is None:
            self._fit = _fitness(self.counts, self.sq, self.instance.capacity)
        return self._fit

    @property
    def value(self) -> int:
        return int(self.counts.max(initial=0))

    def evaluate(self, delta: _Delta) -> Optional[Fraction]:
        """Fitness after the delta, or None when it breaks a capacity."""
        new_rows = [row for _, row in delta.changed.values()] + [row for _, row in delta.added]
        new = np.vstack(new_rows)
        if (new > self.instance.capacity).any():
            return None
        old = self.loads[list(delta.changed)] if delta.changed else new[:0]
        counts = self.counts - (old > 0).sum(axis=0) + (new > 0).sum(axis=0)
        sq = self.sq - (old * old).sum(axis=0) + (new * new).sum(axis=0)
        return _fitness(counts, sq, self.instance.capacity)

    def apply(self, delta: _Delta) -> _Packing:
        bins: List[List[int]] = []
        rows: List[np.ndarray] = []
        for b, items in enumerate(self.bins):
            row = self.loads[b]
            if b in delta.changed:
                items, row = delta.changed[b]
            if items:
                bins.append(list(items))
                rows.append(row)
        for items, row in delta.added:
            if items:
                bins.append(list(items))
                rows.append(row)
        loads = np.vstack(rows) if rows else np.zeros((0, self.instance.d), dtype=np.int64)
        return _Packing(self.instance, bins, loads)

    # move -> delta

    def delta(self, move: Move) -> _Delta:
        cons = self.instance.consumption
        bins, loads, where = self.bins, self.loads, self.where
        ops = move.operands
        changed: Dict[int, Tuple[List[int], np.ndarray]] = {}
        added: List[Tuple[List[int], np.ndarray]] = []

        if move.kind is MoveKind.SWAP:
            i, j = ops
            bi, bj = int(where[i]), int(where[j])
            changed[bi] = ([j if x == i else x for x in bins[bi]], loads[bi] - cons[i] + cons[j])
            changed[bj] = ([i if x == j else x for x in bins[bj]], loads[bj] - cons[j] + cons[i])

        elif move.kind is MoveKind.RELOCATE:
            i, t = ops
            bi = int(where[i])
            changed[bi] = ([x for x in bins[bi] if x != i], loads[bi] - cons[i])
            if t == FRESH:
                added.append(([i], cons[i].copy()))
            else:
                changed[t] = (bins[t] + [i], loads[t] + cons[i])

        elif move.kind is MoveKind.SPLIT_PAIR:
            b1, i, j, t2, t3 = ops
            changed[b1] = (
                [x for x in bins[b1] if x != i and x != j],
                loads[b1] - cons[i] - cons[j],
            )
            if t2 == t3:
                if t2 == FRESH:
                    added.append(([i, j], cons[i] + cons[j]))
                else:
                    changed[t2] = (bins[t2] + [i, j], loads[t2] + cons[i] + cons[j])
            else:
                for t, x in ((t2, i), (t3, j)):
                    if t == FRESH:
                        added.append(([x], cons[x].copy()))
                    else:
                        changed[t] = (bins[t] + [x], loads[t] + cons[x])

        else:
            (b,) = ops
            capacity = self.instance.capacity
            work = loads.copy()
            work[b] = capacity + 1
            grown: Dict[int, List[int]] = {}
            for x in bins[b]:
                cx = cons[x]
                fits = np.flatnonzero((work + cx <= capacity).all(axis=1))
                if fits.size:
                    t = int(fits[0])
                    work[t] += cx
                    grown.setdefault(t, list(bins[t])).append(x)
                    continue
                for items, row in added:
                    if (row + cx <= capacity).all():
                        items.append(x)
                        row += cx
                        break
                else:
                    added.append(([x], cx.copy()))
            changed = {t: (items, work[t].copy()) for t, items in grown.items()}
            changed[b] = ([], np.zeros(self.instance.d, dtype=np.int64))

        return _Delta(changed, added)

    # candidate enumeration, in the documented deterministic order

    def candidates(self, kappa: int) -> Iterator[Move]:
        n = self.instance.n
        cons = self.instance.consumption
        capacity = self.instance.capacity
        n_bins = len(self.bins)
        where = self.where

        if kappa == 1:
            for i in range(n):
                for j in range(i + 1, n):
                    if where[i] != where[j]:
                        yield Move(MoveKind.SWAP, (i, j))

        elif kappa == 2:
            for i in range(n):
                fits = (self.loads + cons[i] <= capacity).all(axis=1)
                for t in range(n_bins):
                    if t != where[i] and fits[t]:
                        yield Move(MoveKind.RELOCATE, (i, t))
                yield Move(MoveKind.RELOCATE, (i, FRESH))

        elif kappa == 3:
            for b1 in range(n_bins):
                if len(self.bins[b1]) < 2:
                    continue
                targets = [t for t in range(n_bins) if t != b1] + [FRESH]
                for i, j in combinations(sorted(self.bins[b1]), 2):
                    fits_i = (self.loads + cons[i] <= capacity).all(axis=1)
                    fits_j = (self.loads + cons[j] <= capacity).all(axis=1)
                    fits_ij = (self.loads + cons[i] + cons[j] <= capacity).all(axis=1)
                    for t2 in targets:
                        if t2 != FRESH and not fits_i[t2]:
                            continue
                        for t3 in targets:
                            if t3 != FRESH and not fits_j[t3]:
                                continue
                            if t2 == t3 and t2 != FRESH and not fits_ij[t2]:
                                continue
                            yield Move(MoveKind.SPLIT_PAIR, (b1, i, j, t2, t3))

        elif kappa == 4:
            for b in range(n_bins):
                yield Move(MoveKind.DISSOLVE, (b,))

        else:
            raise InvalidParameterError(f"kappa {kappa} outside 1..4")

    def neighbors(self, kappa: int) -> Iterator[Tuple[Move, _Delta, Fraction]]:
        for move in self.candidates(kappa):
            delta = self.delta(move)
            value = self.evaluate(delta)
            if value is not None:
                yield move, delta, value


def ffd_construct(instance: Instance) -> Solution:
    """First-fit decreasing over all scenario capacities.

    Items go in non-increasing size order (ties by index) into the lowest-index
    bin that keeps every scenario load within W.
    """
    order = sorted(range(instance.n), key=lambda i: (-instance.sizes[i], i))
    return Solution.from_bins(first_fit_pack(instance.consumption, instance.capacity, order))


def fitness(instance: Instance, solution: Solution) -> Fraction:
    """val_bpps minus the squared per-scenario occupation ratios, exactly.

    Raises:
        InfeasibleSolutionError: If the solution is infeasible.
    """
    ensure_feasible(instance, solution)
    return _Packing.from_solution(instance, solution).fitness


def enumerate_neighbors(instance: Instance, solution: Solution, kappa: int) -> Iterator[Move]:
    """Yield the feasible moves of structure N_kappa in deterministic order."""
    if kappa not in KIND_BY_KAPPA:
        raise InvalidParameterError(f"kappa {kappa} outside 1..4")
    packing = _Packing.from_solution(instance, solution)
    for move, _, _ in packing.neighbors(kappa):
        yield move


def apply_move(instance: Instance, solution: Solution, move: Move) -> Solution:
    """Apply a move; empty bins are dropped and fresh bins appended."""
    packing = _Packing.from_solution(instance, solution)
    delta = packing.delta(move)
    if packing.evaluate(delta) is None:
        raise InvalidParameterError(f"move {move} breaks a scenario capacity")
    return packing.apply(delta).to_solution()


def _shake(packing: _Packing, kappa: int, rng: np.random.Generator) -> _Packing:
    options = [delta for _, delta, _ in packing.neighbors(kappa)]
    if not options:
        return packing
    return packing.apply(options[int(rng.integers(len(options)))])


def shake(
    instance: Instance, solution: Solution, kappa: int, rng: np.random.Generator
) -> Solution:
    """Apply one uniformly drawn feasible move of N_kappa (identity if none)."""
    if kappa not in KIND_BY_KAPPA:
        raise InvalidParameterError(f"kappa {kappa} outside 1..4")
    return _shake(_Packing.from_solution(instance, solution), kappa, rng).to_solution()


def _local_search(packing: _Packing, n_max: int) -> _Packing:
    kappa = 1
    while kappa <= n_max:
        best: Optional[Tuple[Fraction, _Delta]] = None
        for _, delta, value in packing.neighbors(kappa):
            if best is None or value < best[0]:
                best = (value, delta)
        if best is not None and best[0] < packing.fitness:
            packing = packing.apply(best[1])
            packing._fit = best[0]
            kappa = 1
        else:
            kappa += 1
    return packing


def local_search(instance: Instance, solution: Solution, n_max: int = 4) -> Solution:
    """Best-improvement variable neighborhood descent over N1..N_max."""
    if not 1 <= n_max <= 4:
        raise InvalidParameterError(f"n_max {n_max} outside 1..4")
    ensure_feasible(instance, solution)
    return _local_search(_Packing.from_solution(instance, solution), n_max).to_solution()


def vns(
    instance: Instance,
    initial: Optional[Solution] = None,
    config: Optional[VnsConfig] = None,
) -> Tuple[Solution, VnsStats]:
    """Variable neighborhood search from an initial solution (FFD if omitted).

    Each outer iteration runs shake + descent for kappa = 1..n_max - 1, restarting
    at 1 on a strict fitness improvement. The loop stops once the elapsed time
    reaches t_max or c_max outer iterations pass without improvement. Time
    is checked once per outer iteration.

    Returns:
        The best solution seen (lowest val_bpps, then lowest fitness) and stats.
    """
    config = config or VnsConfig()
    initial = initial if initial is not None else ffd_construct(instance)
    ensure_feasible(instance, initial)
    rng = make_rng(config.seed)

    start = time.perf_counter()
    x = _Packing.from_solution(instance, initial)
    best = x
    stats = VnsStats(history=[(0, best.value)])
    t, c = 0.0, 0

    while t < config.t_max and c < config.c_max:
        stats.iterations += 1
        kappa = 1
        improvement = False
        while kappa < config.n_max:
            shaken = _shake(x, kappa, rng)
            candidate = _local_search(shaken, config.n_max)
            if (candidate.value, candidate.fitness) < (best.value, best.fitness):
                best = candidate
                stats.history.append((stats.iterations, best.value))
            if candidate.fitness < x.fitness:
                x = candidate
                kappa = 1
                improvement = True
                stats.improvements += 1
            else:
                kappa += 1
        c = 0 if improvement else c + 1
        t = time.perf_counter() - start

    stats.time_s = time.perf_counter() - start
    logger.info(
        "vns.done",
        iterations=stats.iterations,
        improvements=stats.improvements,
        value=best.value,
        time_s=round(stats.time_s, 3),
    )
    return best.to_solution(), stats
