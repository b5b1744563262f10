"""Direct solve of the Lagrange system of ``||x - y||^2`` on ``X x Y``.

The multipliers are homogenized, ``(v0, v)`` and ``(w0, w)``, and each is
restricted to a random affine patch ``c . (v0, v) = 1``. The target system

    F(x) = 0,  G(y) = 0,
    v0 (x - y) - J_F(x)^T v = 0,
    w0 (y - x) - J_G(y)^T w = 0,
    patch_v = 0,  patch_w = 0

is solved by a gamma-trick homotopy from a linear-product start system for
the groups ``{x, y}``, ``{v0, v}``, ``{w0, w}``. It needs no normal-locus
solves, so it serves as an independent check on :mod:`bottleneck`.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import rng as rng_mod
from .algebra import Poly, PolySystem, VariableGroups, multihomogeneous_count, square_system
from .bottleneck import (
    BottleneckPair,
    BottleneckRunConfig,
    Classification,
    derived_seed,
    filter_real,
)
from .bottleneck import classify_endpoints
from .multihom import solve_square
from .tracking import PathOutcome, PathStatus, TrackerConfig


@dataclass
class DirectSolveReport:
    paths: int
    classification: Classification
    real_pairs: list[BottleneckPair]
    wall_time: float
    multihom_count: int
    seed: int = 0
    at_infinity: int = 0
    outcomes: list[PathOutcome] = field(default_factory=list, repr=False)

    @property
    def solutions(self) -> list[BottleneckPair]:
        return self.classification.pairs

    def counts(self) -> dict:
        c = {"paths": self.paths, "multihom": self.multihom_count, "at_infinity": self.at_infinity}
        c.update(self.classification.counts())
        c["real_pairs"] = len(self.real_pairs)
        return c


def build_lagrange_system(Fs: PolySystem, Gs: PolySystem, patch_v, patch_w):
    """Homogenized Lagrange system and its variable groups.

    Variables are ordered ``x, y, v0, v, w0, w``.
    """
    n = Fs.ambient_dim
    a, b = len(Fs), len(Gs)
    N = 2 * n + (a + 1) + (b + 1)
    xi = list(range(n))
    yi = list(range(n, 2 * n))
    v0 = 2 * n
    vi = list(range(v0 + 1, v0 + 1 + a))
    w0 = v0 + 1 + a
    wi = list(range(w0 + 1, w0 + 1 + b))
    X = [Poly.variable(N, k) for k in xi]
    Y = [Poly.variable(N, k) for k in yi]

    def rows(S, idx, mult, scale, sign):
        out = []
        s = Poly.variable(N, scale)
        for j in range(n):
            row = sign * s * (X[j] - Y[j])
            for i in range(len(S)):
                d = S.derivatives[i][j]
                if not d.is_zero():
                    row = row - Poly.variable(N, mult[i]) * d.embed(N, idx)
            out.append(row)
        return out

    def patch(coefs, idx):
        # c . z - 1
        return Poly.linear(np.concatenate([np.zeros(idx[0]), coefs, np.zeros(N - idx[-1] - 1)]), -1.0)

    polys = [f.embed(N, xi) for f in Fs.polys]
    polys += [g.embed(N, yi) for g in Gs.polys]
    polys += rows(Fs, xi, vi, v0, 1.0)
    polys += rows(Gs, yi, wi, w0, -1.0)
    polys.append(patch(patch_v, [v0] + vi))
    polys.append(patch(patch_w, [w0] + wi))
    names = (
        [f"x{k + 1}" for k in range(n)]
        + [f"y{k + 1}" for k in range(n)]
        + ["v0"] + [f"v{k + 1}" for k in range(a)]
        + ["w0"] + [f"w{k + 1}" for k in range(b)]
    )
    groups = [xi + yi, [v0] + vi, [w0] + wi]
    return PolySystem(names, polys), groups


def _dehomogenize(z, n, a, b):
    """``(x, y, v/v0, w/w0)``, or ``None`` when a multiplier is at infinity."""
    x, y = z[:n], z[n : 2 * n]
    v0, v = z[2 * n], z[2 * n + 1 : 2 * n + 1 + a]
    k = 2 * n + 1 + a
    w0, w = z[k], z[k + 1 : k + 1 + b]
    tiny = 1e-10
    if abs(v0) <= tiny * (1.0 + np.linalg.norm(v)) or abs(w0) <= tiny * (1.0 + np.linalg.norm(w)):
        return None
    return np.concatenate([x, y, v / v0, w / w0])


def solve_direct(
    spec_x: PolySystem,
    spec_y: PolySystem | None = None,
    cfg: BottleneckRunConfig | None = None,
    tracker: TrackerConfig | None = None,
    seed: int = 0,
) -> DirectSolveReport:
    """All bottleneck pairs of ``X`` and ``Y`` from one multihomogeneous solve.

    ``spec_y=None`` means ``Y = X``; pairs are then folded under the swap.
    Endpoints are classified with the same rules as the specialized pipeline.
    """
    t0 = time.perf_counter()
    cfg = cfg or BottleneckRunConfig()
    if spec_y is None:
        spec_y = spec_x
        cfg = replace(cfg, symmetric=True)
    n = spec_x.ambient_dim
    if spec_y.ambient_dim != n:
        raise ValueError(f"ambient dimensions differ: {n} vs {spec_y.ambient_dim}")
    sq_x = square_system(spec_x, derived_seed(seed, "square-x"))
    sq_y = sq_x if cfg.symmetric else square_system(spec_y, derived_seed(seed, "square-y"))
    a, b = sq_x.codim, sq_y.codim
    gen = rng_mod.stream(seed, "patch")
    patch_v = rng_mod.complex_normal(gen, a + 1)
    patch_w = rng_mod.complex_normal(gen, b + 1)
    system, groups = build_lagrange_system(sq_x.squared, sq_y.squared, patch_v, patch_w)
    vg = VariableGroups.from_system(system, groups)
    expected = multihomogeneous_count(system, vg)
    solve = solve_square(system, vg, tracker, derived_seed(seed, "direct"), name="direct", workers=cfg.workers)

    affine, at_inf = [], 0
    for o in solve.outcomes:
        if o.status in (PathStatus.CONVERGED, PathStatus.SINGULAR):
            z = _dehomogenize(o.endpoint, n, a, b)
            if z is None:
                at_inf += 1
                o = replace(o, status=PathStatus.DIVERGED)
            else:
                o = replace(o, endpoint=z)
        affine.append(o)
    cls = classify_endpoints(affine, sq_x.original, sq_y.original, cfg, a, b)
    return DirectSolveReport(
        paths=len(solve.outcomes),
        classification=cls,
        real_pairs=filter_real(cls.pairs, cfg.real_tol),
        wall_time=time.perf_counter() - t0,
        multihom_count=expected,
        seed=seed,
        at_infinity=at_inf,
        outcomes=solve.outcomes,
    )


def same_pair_set(p, q, tol: float = 1e-6) -> bool:
    """Whether two pair lists agree as sets up to relative ``tol``."""
    if len(p) != len(q):
        return False
    used = [False] * len(q)
    for a in p:
        for j, b in enumerate(q):
            if not used[j] and np.linalg.norm(a.key() - b.key()) <= tol * (1.0 + np.linalg.norm(b.key())):
                used[j] = True
                break
        else:
            return False
    return True
