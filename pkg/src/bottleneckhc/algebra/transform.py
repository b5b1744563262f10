"""Squaring of over-determined systems and diagonal coordinate changes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import rng as rng_mod
from .poly import Poly, PolySystem


@dataclass(frozen=True)
class SquaredSystem:
    """``codim`` generic linear combinations of an over-determined system.

    ``squared.polys[i] == sum_j mix_matrix[i, j] * original.polys[j]``; the
    squared system may vanish on extra components, which callers filter by
    evaluating ``original``.
    """

    original: PolySystem
    squared: PolySystem
    mix_matrix: np.ndarray
    seed: int

    @property
    def codim(self) -> int:
        return len(self.squared)

    @property
    def is_passthrough(self) -> bool:
        return len(self.original) == len(self.squared)


def square_system(system: PolySystem, seed: int) -> SquaredSystem:
    a = system.codim
    r = len(system)
    if r < a:
        raise ValueError(f"{r} equations cannot cut out codimension {a}")
    if r == a:
        mix = np.eye(a, dtype=complex)
        return SquaredSystem(system, system, mix, seed)
    gen = rng_mod.stream(seed, "square")
    mix = rng_mod.complex_normal(gen, (a, r))
    polys = []
    for row in mix:
        acc = Poly(system.ambient_dim)
        for c, p in zip(row, system.polys):
            acc = acc + c * p
        polys.append(acc)
    return SquaredSystem(system, system.with_polys(polys), mix, seed)


def diagonal_change(system: PolySystem, seed: int, factors=None):
    """Substitute ``x_i -> d_i x_i`` with random real ``d_i`` in [0.5, 2].

    Returns ``(transformed_system, d)``. The number of real connected
    components is preserved; bottlenecks are not.
    """
    if factors is None:
        gen = rng_mod.stream(seed, "diagonal")
        factors = gen.uniform(0.5, 2.0, system.ambient_dim)
    d = np.asarray(factors, dtype=float)
    if d.shape != (system.ambient_dim,):
        raise ValueError("one factor per variable required")
    return system.with_polys([p.scale_vars(d) for p in system.polys]), d
