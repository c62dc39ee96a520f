#!/usr/bin/env python3
"""Lower bounds on the optimal worst-case scenario bin count.

All arithmetic is integral: sizes are mapped on the absolute scale and the
per-scenario sums are divided by W with ceiling division.
"""

from __future__ import annotations

from typing import Tuple

import numpy as np
from pydantic import BaseModel, Field

from .exceptions import InvalidParameterError
from .models import Instance


class DffParam(BaseModel):
    """Parameter of the Fekete-Schepers dual feasible function."""

    lam: int = Field(ge=1, description="Threshold lambda in 1..W//2")

    def check(self, capacity: int) -> int:
        if self.lam > capacity // 2:
            raise InvalidParameterError(
                f"lambda {self.lam} outside [1, {capacity // 2}] for W={capacity}"
            )
        return self.lam


def _lam(lam: int | DffParam, capacity: int) -> int:
    if isinstance(lam, DffParam):
        return lam.check(capacity)
    if not 1 <= lam <= capacity // 2:
        raise InvalidParameterError(
            f"lambda {lam} outside [1, {capacity // 2}] for W={capacity}"
        )
    return lam


def _ceil_div(a: np.ndarray | int, b: int) -> np.ndarray | int:
    return -(-a // b)


def lb_continuous(instance: Instance) -> int:
    """max_k ceil(sum of S_k sizes / W)."""
    if instance.n == 0:
        return 0
    return int(_ceil_div(instance.scenario_loads(), instance.capacity).max())


def dff_fekete(s: int, lam: int | DffParam, W: int) -> int:
    """Fekete-Schepers DFF on absolute sizes.

    Returns W if s > W - lam, 0 if s <= lam, and s otherwise.

    Raises:
        InvalidParameterError: If s is outside [0, W] or lam is invalid.
    """
    lam = _lam(lam, W)
    if not 0 <= s <= W:
        raise InvalidParameterError(f"size {s} outside [0, {W}]")
    if s > W - lam:
        return W
    if s <= lam:
        return 0
    return s


def _dff_vector(sizes: np.ndarray, lam: int, W: int) -> np.ndarray:
    return np.where(sizes > W - lam, W, np.where(sizes <= lam, 0, sizes))


def lb_dff(instance: Instance, lam: int | DffParam) -> int:
    """max_k ceil(sum over S_k of f(s_i) / W) for the given lambda."""
    W = instance.capacity
    lam = _lam(lam, W)
    if instance.n == 0:
        return 0
    mapped = _dff_vector(np.asarray(instance.sizes, dtype=np.int64), lam, W)
    loads = instance.membership.T.astype(np.int64) @ mapped
    return int(_ceil_div(loads, W).max())


def best_dff_lambda(instance: Instance) -> Tuple[int, int]:
    """Sweep lambda over 1..W//2 and return (best lambda, its bound).

    Ties keep the smallest lambda. For W = 1 there is no valid lambda and
    (0, 0) is returned.
    """
    best_lam, best = 0, 0
    for lam in range(1, instance.capacity // 2 + 1):
        value = lb_dff(instance, lam)
        if value > best:
            best_lam, best = lam, value
    return best_lam, best


def lb_root(instance: Instance) -> int:
    """Best of the continuous bound and every DFF bound."""
    return max(lb_continuous(instance), best_dff_lambda(instance)[1])
