"""Benchmark families and named example varieties."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import rng as rng_mod
from .algebra import Poly, PolySystem, parse_system

NAMED = {
    "circle": "vars: x,y; dim: 1; x^2 + y^2 - 1;",
    "ellipse": "vars: x,y; dim: 1; 0.25*x^2 + y^2 - 1;",
    "two-ovals": "vars: x,y; dim: 1; (x^2 - 1)*(x^2 - 4) + y^4 + y^2;",
    "goursat": "vars: x,y,z; dim: 2; x^4 + y^4 + z^4 + (x^2 + y^2 + z^2)^2 - 2*(x^2 + y^2 + z^2) - 3;",
}


def named(name: str) -> PolySystem:
    try:
        return parse_system(NAMED[name])
    except KeyError:
        raise ValueError(f"unknown example {name!r}; choose from {sorted(NAMED)}") from None


def _names(n):
    return [f"x{k + 1}" for k in range(n)]


def random_hypersurface(n: int, d: int, gen: np.random.Generator) -> PolySystem:
    """Dense degree-``d`` hypersurface in ``n`` variables with real Gaussian coefficients."""
    terms = [
        (e, float(gen.standard_normal()))
        for e in itertools.product(range(d + 1), repeat=n)
        if sum(e) <= d
    ]
    return PolySystem(_names(n), [Poly(n, terms)], declared_dim=n - 1)


def random_rational_normal_curve(n: int, gen: np.random.Generator) -> PolySystem:
    """Rational normal curve of degree ``n``: the 2x2 minors of a random
    2 x n matrix of real affine forms."""
    L = [[Poly.linear(gen.standard_normal(n), float(gen.standard_normal())) for _ in range(n)] for _ in range(2)]
    minors = [L[0][i] * L[1][j] - L[0][j] * L[1][i] for i, j in itertools.combinations(range(n), 2)]
    return PolySystem(_names(n), minors, declared_dim=1)


@dataclass
class Family:
    label: str
    x: PolySystem
    y: PolySystem | None  # None: Y = X, symmetric run


FAMILIES = ("quadric-surfaces", "cubic-surfaces", "cubic-surface", "quartic-surfaces", "rnc", "conics")


def make_family(name: str, n: int = 3, seed: int = 0) -> Family:
    """Random instance of a benchmark family; ``n`` is the ambient dimension."""
    gx = rng_mod.stream(seed, f"family/{name}/x")
    gy = rng_mod.stream(seed, f"family/{name}/y")
    surf = {"quadric-surfaces": 2, "cubic-surfaces": 3, "cubic-surface": 3, "quartic-surfaces": 4}
    if name in surf:
        if n != 3:
            raise ValueError(f"{name} is defined for n = 3")
        d = surf[name]
        if name == "cubic-surface":
            return Family("One cubic surface in C^3", random_hypersurface(3, d, gx), None)
        word = {2: "quadratic", 3: "cubic", 4: "quartic"}[d]
        return Family(f"Two {word} surfaces in C^3", random_hypersurface(3, d, gx), random_hypersurface(3, d, gy))
    if name == "rnc":
        if n < 2:
            raise ValueError("rnc needs n >= 2")
        return Family(
            f"Two rational normal curves in C^{n}",
            random_rational_normal_curve(n, gx),
            random_rational_normal_curve(n, gy),
        )
    if name == "conics":
        if n != 2:
            raise ValueError("conics is defined for n = 2")
        return Family("Two conics in C^2", random_hypersurface(2, 2, gx), random_hypersurface(2, 2, gy))
    raise ValueError(f"unknown family {name!r}; choose from {list(FAMILIES)}")
