"""Multihomogeneous Bezout numbers."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from .poly import PolySystem


@dataclass(frozen=True)
class VariableGroups:
    groups: tuple[tuple[int, ...], ...]
    degrees: tuple[tuple[int, ...], ...]  # degrees[i][k]: degree of poly i in group k

    @classmethod
    def from_system(cls, system: PolySystem, groups: Sequence[Sequence[int]]) -> "VariableGroups":
        groups = tuple(tuple(g) for g in groups)
        flat = [i for g in groups for i in g]
        if sorted(flat) != list(range(system.ambient_dim)):
            raise ValueError("variable groups must partition the variables")
        degrees = tuple(tuple(p.degree_in(g) for g in groups) for p in system.polys)
        return cls(groups, degrees)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(g) for g in self.groups)


def multihomogeneous_count(system: PolySystem, groups: VariableGroups) -> int:
    """Coefficient of ``prod_k Z_k^{n_k}`` in ``prod_i sum_k d_ik Z_k``."""
    if len(system) != system.ambient_dim:
        raise ValueError("multihomogeneous count needs a square system")
    degrees = groups.degrees
    sizes = groups.sizes

    @lru_cache(maxsize=None)
    def count(i: int, remaining: tuple[int, ...]) -> int:
        if i == len(degrees):
            return int(not any(remaining))
        total = 0
        for k, d in enumerate(degrees[i]):
            if d and remaining[k]:
                rest = remaining[:k] + (remaining[k] - 1,) + remaining[k + 1:]
                total += d * count(i + 1, rest)
        return total

    return count(0, sizes)


def total_degree_count(system: PolySystem) -> int:
    out = 1
    for d in system.degrees:
        out *= d
    return out
