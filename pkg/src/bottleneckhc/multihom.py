"""Linear-product start systems and gamma-trick solves of square systems."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng as rng_mod
from .algebra import Poly, PolySystem, VariableGroups
from .tracking import PathOutcome, PolyHomotopy, TrackerConfig, linear_homotopy, track_all


@dataclass
class StartSystem:
    """Each start equation is a product of random affine forms, one per unit
    of degree in each variable group; its roots are found group by group."""

    polys: list[Poly]
    solutions: list[np.ndarray]
    groups: VariableGroups


def _affine_form(num_vars: int, var_idx, coefs, const) -> Poly:
    terms = [(tuple(int(k == v) for k in range(num_vars)), c) for v, c in zip(var_idx, coefs)]
    terms.append(((0,) * num_vars, const))
    return Poly(num_vars, terms)


def linear_product_start(system: PolySystem, groups: VariableGroups, gen: np.random.Generator) -> StartSystem:
    n = system.ambient_dim
    if len(system) != n:
        raise ValueError("start systems are built for square systems only")
    # forms[i] = list of (group, coef vector, constant)
    forms: list[list[tuple[int, np.ndarray, complex]]] = []
    polys = []
    for i in range(len(system)):
        row = []
        p = Poly.constant(n, 1.0)
        for k, g in enumerate(groups.groups):
            for _ in range(groups.degrees[i][k]):
                a = rng_mod.complex_normal(gen, len(g))
                b = complex(rng_mod.complex_normal(gen))
                row.append((k, a, b))
                p = p * _affine_form(n, g, a, b)
        forms.append(row)
        polys.append(p)

    sizes = groups.sizes
    cache: dict = {}

    def group_solution(k, chosen):
        key = (k, chosen)
        if key not in cache:
            A = np.array([forms[i][j][1] for i, j in chosen])
            b = np.array([forms[i][j][2] for i, j in chosen])
            cache[key] = np.linalg.solve(A, -b)
        return cache[key]

    solutions = []
    picked: list[list[tuple[int, int]]] = [[] for _ in sizes]

    def rec(i):
        if i == len(forms):
            z = np.empty(n, dtype=complex)
            for k, g in enumerate(groups.groups):
                z[list(g)] = group_solution(k, tuple(picked[k]))
            solutions.append(z)
            return
        for j, (k, _, _) in enumerate(forms[i]):
            if len(picked[k]) < sizes[k]:
                picked[k].append((i, j))
                rec(i + 1)
                picked[k].pop()

    rec(0)
    return StartSystem(polys, solutions, groups)


@dataclass
class SquareSolve:
    outcomes: list[PathOutcome]
    starts: list[np.ndarray]
    homotopy: PolyHomotopy
    gamma: complex


def solve_square(
    system: PolySystem,
    groups,
    cfg: TrackerConfig | None,
    seed: int,
    name: str = "solve",
    workers: int = 1,
) -> SquareSolve:
    """Solve a square system by a gamma-trick homotopy from a linear-product start.

    ``groups`` is a :class:`VariableGroups` or a list of index groups; a
    single group gives the total-degree homotopy.
    """
    if not isinstance(groups, VariableGroups):
        groups = VariableGroups.from_system(system, groups)
    gen = rng_mod.stream(seed, name + "/start")
    start = linear_product_start(system, groups, gen)
    gamma = rng_mod.unit_complex(rng_mod.stream(seed, name + "/gamma"))
    H = linear_homotopy(system.polys, start.polys, gamma, label=name)
    outcomes = track_all(H, start.solutions, cfg, workers=workers)
    return SquareSolve(outcomes, start.solutions, H, gamma)
