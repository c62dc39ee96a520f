#!/usr/bin/env python3
"""Exhaustive reference solver for tiny instances."""

from __future__ import annotations

from typing import List

import numpy as np
import structlog

from .bounds import lb_root
from .core import val_bpps
from .exceptions import InvalidParameterError
from .heuristic import ffd_construct
from .models import Instance, Solution

logger = structlog.get_logger(__name__)

MAX_ITEMS = 12


def solve_enumeration(instance: Instance, max_items: int = MAX_ITEMS) -> Solution:
    """Optimal solution by enumerating set partitions.

    Items are placed largest first into an existing bin or the next new one,
    so each partition is visited once; a branch dies as soon as some scenario
    already counts as many bins as the best packing found.

    Raises:
        InvalidParameterError: If the instance has more than ``max_items`` items.
    """
    if instance.n > max_items:
        raise InvalidParameterError(
            f"enumeration is limited to {max_items} items, got {instance.n}"
        )
    best = ffd_construct(instance)
    best_value = val_bpps(instance, best)
    floor = lb_root(instance)
    if best_value <= floor:
        return best

    order = sorted(range(instance.n), key=lambda i: (-instance.sizes[i], i))
    consumption = instance.consumption
    W = instance.capacity
    bins: List[List[int]] = []
    loads: List[np.ndarray] = []
    counts = np.zeros(instance.d, dtype=np.int64)

    def place(pos: int) -> bool:
        nonlocal best, best_value
        if pos == len(order):
            value = int(counts.max(initial=0))
            if value < best_value:
                best_value = value
                best = Solution.from_bins(bins)
                logger.debug("enumeration.improved", value=value)
            return best_value <= floor
        i = order[pos]
        row = consumption[i]
        for b in range(len(bins) + 1):
            if b < len(bins):
                new_load = loads[b] + row
                if (new_load > W).any():
                    continue
                fresh = (loads[b] == 0) & (row > 0)
                if (counts + fresh).max(initial=0) >= best_value:
                    continue
                bins[b].append(i)
                loads[b] = new_load
                counts[fresh] += 1
                done = place(pos + 1)
                counts[fresh] -= 1
                loads[b] = new_load - row
                bins[b].pop()
            else:
                fresh = row > 0
                if (counts + fresh).max(initial=0) >= best_value:
                    continue
                bins.append([i])
                loads.append(row.copy())
                counts[fresh] += 1
                done = place(pos + 1)
                counts[fresh] -= 1
                loads.pop()
                bins.pop()
            if done:
                return True
        return False

    place(0)
    return best
