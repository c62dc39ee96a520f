#!/usr/bin/env python3
"""Seeded random instance generation.

Randomness comes from numpy's PCG64 bit generator, so a given parameter set
and seed yields the same instance on every platform numpy supports.
"""

from __future__ import annotations

from typing import Optional

import numpy as np
import structlog

from .exceptions import InvalidParameterError
from .models import Instance

logger = structlog.get_logger(__name__)


def derive_seed(seed: int, class_index: int = 0, replicate: int = 0) -> int:
    """Mix a base seed with a class and replicate index into a 64-bit seed."""
    seq = np.random.SeedSequence([seed, class_index, replicate])
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def generate_instance(
    n: int,
    d: int,
    seed: int,
    size_lo: int = 1,
    size_hi: int = 99,
    W: int = 100,
    p: float = 0.5,
    name: Optional[str] = None,
) -> Instance:
    """Draw sizes uniformly and scenario memberships as Bernoulli(p).

    An item whose scenario set comes out empty is redrawn until it is not.

    Args:
        n: Number of items (>= 1).
        d: Number of scenarios (>= 1).
        seed: PRNG seed.
        size_lo: Smallest size.
        size_hi: Largest size (<= W).
        W: Bin capacity.
        p: Membership probability, in (0, 1].

    Returns:
        A valid Instance.

    Raises:
        InvalidParameterError: If a range is invalid.
    """
    if n < 1 or d < 1:
        raise InvalidParameterError(f"need n >= 1 and d >= 1, got n={n}, d={d}")
    if not 1 <= size_lo <= size_hi <= W:
        raise InvalidParameterError(
            f"need 1 <= size_lo <= size_hi <= W, got {size_lo}, {size_hi}, {W}"
        )
    if not 0 < p <= 1:
        raise InvalidParameterError(f"membership probability {p} outside (0, 1]")

    rng = make_rng(seed)
    sizes = rng.integers(size_lo, size_hi, size=n, endpoint=True)
    scenarios = []
    redraws = 0
    for _ in range(n):
        while True:
            row = np.flatnonzero(rng.random(d) < p)
            if row.size:
                break
            redraws += 1
        scenarios.append(frozenset(int(k) for k in row))
    if redraws:
        logger.debug("generator.redraw", n=n, d=d, seed=seed, redraws=redraws)
    return Instance(
        n=n,
        d=d,
        capacity=W,
        sizes=tuple(int(s) for s in sizes),
        scenarios=tuple(scenarios),
        name=name,
    )
