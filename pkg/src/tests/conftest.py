#!/usr/bin/env python3
"""Shared fixtures and small instance builders."""

from __future__ import annotations

from typing import Callable, Iterable, Optional, Sequence

import pytest

from scenario_binpack.generator import generate_instance
from scenario_binpack.models import Instance


def build(
    sizes: Sequence[int],
    scenarios: Sequence[Iterable[int]],
    W: int = 100,
    d: Optional[int] = None,
    name: Optional[str] = None,
) -> Instance:
    """Instance from sizes and 0-based scenario sets; d defaults to the largest index + 1."""
    sets = tuple(frozenset(s) for s in scenarios)
    if d is None:
        d = max((max(s) for s in sets if s), default=0) + 1
    return Instance(
        n=len(sizes), d=d, capacity=W, sizes=tuple(sizes), scenarios=sets, name=name
    )


@pytest.fixture
def make_instance() -> Callable[..., Instance]:
    return build


@pytest.fixture
def random_instance() -> Callable[..., Instance]:
    def factory(n: int, d: int, seed: int, **kwargs) -> Instance:
        return generate_instance(n, d, seed, **kwargs)

    return factory


@pytest.fixture
def two_conflicting() -> Instance:
    # two items of 60 sharing scenario 0: never in one bin
    return build([60, 60], [{0}, {0}])


@pytest.fixture
def two_disjoint() -> Instance:
    # two items of 60 in different scenarios: one bin suffices
    return build([60, 60], [{0}, {1}])


@pytest.fixture(autouse=True)
def quiet_logging():
    from scenario_binpack.config import configure_logging

    configure_logging("WARNING")
    yield
