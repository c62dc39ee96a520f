#!/usr/bin/env python3
"""Ryan-Foster branching decisions.

A branch state records which original items must share a bin (merged into
pseudo-items through a union-find) and which item pairs must be kept apart.
States are immutable; each branch derives a new one.
"""

from __future__ import annotations

from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .models import Instance


class BranchState(BaseModel):
    """Together/apart decisions of one branch-and-price node."""

    model_config = ConfigDict(frozen=True)

    parent: Tuple[int, ...] = Field(description="Union-find parent per original item")
    apart: FrozenSet[Tuple[int, int]] = Field(
        default_factory=frozenset, description="Pairs (l, m), l < m, kept apart"
    )
    depth: int = Field(default=0, ge=0)

    @classmethod
    def root(cls, n: int) -> BranchState:
        return cls(parent=tuple(range(n)))

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            i = self.parent[i]
        return i

    @cached_property
    def members(self) -> Dict[int, Tuple[int, ...]]:
        """Group representative (smallest item) -> sorted members."""
        groups: Dict[int, List[int]] = {}
        for i in range(len(self.parent)):
            groups.setdefault(self.find(i), []).append(i)
        return {min(g): tuple(g) for g in groups.values()}

    @cached_property
    def rep(self) -> Tuple[int, ...]:
        """Representative (smallest member) of every item's group."""
        out = [0] * len(self.parent)
        for r, group in self.members.items():
            for i in group:
                out[i] = r
        return tuple(out)

    def groups(self) -> List[Tuple[int, ...]]:
        """Pseudo-items ordered by their smallest member."""
        return [self.members[r] for r in sorted(self.members)]

    def group_feasible(self, instance: Instance, group: Iterable[int]) -> bool:
        load = instance.consumption[list(group)].sum(axis=0)
        return bool((load <= instance.capacity).all())

    def together(self, l: int, m: int, instance: Optional[Instance] = None) -> Optional[BranchState]:
        """Merge the groups of l and m; None if that contradicts the node."""
        a, b = self.rep[l], self.rep[m]
        if a == b:
            return self
        merged = set(self.members[a]) | set(self.members[b])
        for x, y in self.apart:
            if x in merged and y in merged:
                return None
        if instance is not None and not self.group_feasible(instance, merged):
            return None
        parent = list(self.parent)
        parent[self.find(b)] = self.find(a)
        return BranchState(parent=tuple(parent), apart=self.apart, depth=self.depth + 1)

    def separate(self, l: int, m: int) -> Optional[BranchState]:
        """Forbid l and m in one bin; None if they are already merged."""
        if self.rep[l] == self.rep[m]:
            return None
        pair = (min(l, m), max(l, m))
        return BranchState(parent=self.parent, apart=self.apart | {pair}, depth=self.depth + 1)

    def allows(self, items: FrozenSet[int]) -> bool:
        """True if a bin with exactly these items respects every decision."""
        for i in items:
            if len(self.members[self.rep[i]]) > 1 and not items.issuperset(
                self.members[self.rep[i]]
            ):
                return False
        for x, y in self.apart:
            if x in items and y in items:
                return False
        return True

    def apart_groups(self) -> FrozenSet[Tuple[int, int]]:
        """Apart decisions lifted to group representatives."""
        return frozenset(
            (min(self.rep[x], self.rep[y]), max(self.rep[x], self.rep[y])) for x, y in self.apart
        )

    def group_loads(self, instance: Instance) -> np.ndarray:
        """(groups x d) consumption of the pseudo-items, in groups() order."""
        return np.vstack([instance.consumption[list(g)].sum(axis=0) for g in self.groups()])
