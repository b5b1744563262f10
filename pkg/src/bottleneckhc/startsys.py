"""Normal-locus (start) systems and the empirical Euclidean distance degree."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from . import rng as rng_mod
from .algebra import (
    Poly,
    PolySystem,
    SquaredSystem,
    VariableGroups,
    multihomogeneous_count,
    square_system,
)
from .multihom import solve_square
from .tracking import PathStatus, TrackerConfig

log = logging.getLogger(__name__)

FILTER_TOL = 1e-8
DEDUP_TOL = 1e-6


@dataclass
class NormalPoint:
    x: np.ndarray
    v: np.ndarray
    residual: float


@dataclass
class NormalLocusResult:
    points: list[NormalPoint]
    paths_followed: int
    divergent: int
    p0: np.ndarray
    seed: int
    squared: SquaredSystem
    singular: int = 0
    truncated: int = 0
    extraneous: int = 0
    duplicates: int = 0
    wall_time: float = 0.0
    projection: np.ndarray | None = field(default=None, repr=False)

    @property
    def edd(self) -> int:
        return len(self.points)

    def as_vectors(self) -> list[np.ndarray]:
        return [np.concatenate([p.x, p.v]) for p in self.points]


def normal_block(F: PolySystem, num_vars: int, x_idx, v_idx, direction: list[Poly]) -> list[Poly]:
    """Rows ``direction_j - sum_i v_i dF_i/dx_j`` in a ``num_vars`` space."""
    rows = []
    for j in range(F.ambient_dim):
        row = direction[j]
        for i in range(len(F)):
            d = F.derivatives[i][j]
            if not d.is_zero():
                row = row - Poly.variable(num_vars, v_idx[i]) * d.embed(num_vars, x_idx)
        rows.append(row)
    return rows


def projector(M, n: int) -> np.ndarray | None:
    """``M^T M`` for a projection matrix, ``None`` for the identity."""
    if M is None:
        return None
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[1] != n or M.shape[0] > n:
        raise ValueError(f"projection must be m x {n} with m <= {n}, got {M.shape}")
    return M.T @ M


def apply_projector(P, vec: list[Poly]) -> list[Poly]:
    if P is None:
        return vec
    n = len(vec)
    out = []
    for j in range(n):
        acc = Poly(vec[0].num_vars)
        for k in range(n):
            if P[j, k] != 0.0:
                acc = acc + P[j, k] * vec[k]
        out.append(acc)
    return out


def _squared(spec, seed) -> SquaredSystem:
    return spec if isinstance(spec, SquaredSystem) else square_system(spec, seed)


def build_normal_locus_system(F, p0, projection=None) -> PolySystem:
    """Square system in ``(x, v)``: ``F(x) = 0`` and ``(x - p0) = J_F(x)^T v``.

    With a projection matrix ``M`` the left side becomes ``M^T M (x - p0)``.
    """
    Fs = F.squared if isinstance(F, SquaredSystem) else F
    n, a = Fs.ambient_dim, len(Fs)
    if a != Fs.codim:
        raise ValueError(f"system has {a} equations, expected codim {Fs.codim}; square it first")
    p0 = np.asarray(p0, dtype=complex)
    if p0.shape != (n,):
        raise ValueError(f"p0 must have {n} coordinates")
    N = n + a
    x_idx = list(range(n))
    v_idx = list(range(n, N))
    direction = [Poly.variable(N, j) - p0[j] for j in range(n)]
    direction = apply_projector(projector(projection, n), direction)
    polys = [f.embed(N, x_idx) for f in Fs.polys]
    polys += normal_block(Fs, N, x_idx, v_idx, direction)
    names = list(Fs.vars) + [f"v{i + 1}" for i in range(a)]
    return PolySystem(names, polys)


def normal_locus_groups(n: int, a: int):
    return [list(range(n)), list(range(n, n + a))]


def dedup(vectors, tol: float):
    """Greedy relative dedup; returns kept indices."""
    kept: list[int] = []
    for i, z in enumerate(vectors):
        if not any(np.linalg.norm(z - vectors[j]) <= tol * (1.0 + np.linalg.norm(vectors[j])) for j in kept):
            kept.append(i)
    return kept


def solve_normal_locus(
    spec,
    p0=None,
    cfg: TrackerConfig | None = None,
    seed: int = 0,
    projection=None,
    filter_tol: float = FILTER_TOL,
    dedup_tol: float = DEDUP_TOL,
    workers: int = 1,
) -> NormalLocusResult:
    """Solve the normal locus of ``spec`` with respect to ``p0``.

    ``spec`` is a :class:`PolySystem` (squared here if over-determined) or an
    already :class:`SquaredSystem`. Endpoints are kept when they converged,
    satisfy the original equations to ``filter_tol`` (scaled residual) and
    are not duplicates.
    """
    t0 = time.perf_counter()
    sq = _squared(spec, seed)
    n, a = sq.squared.ambient_dim, sq.codim
    if p0 is None:
        p0 = rng_mod.complex_normal(rng_mod.stream(seed, "p0"), n)
    p0 = np.asarray(p0, dtype=complex)
    system = build_normal_locus_system(sq, p0, projection)
    groups = VariableGroups.from_system(system, normal_locus_groups(n, a))
    solve = solve_square(system, groups, cfg, seed, name="normal-locus", workers=workers)

    original = sq.original.compiled
    candidates, residuals = [], []
    counts = dict(divergent=0, singular=0, truncated=0, extraneous=0)
    for o in solve.outcomes:
        if o.status is PathStatus.DIVERGED:
            counts["divergent"] += 1
            continue
        if o.status is PathStatus.TRUNCATED:
            counts["truncated"] += 1
            continue
        if o.status is PathStatus.SINGULAR:
            counts["singular"] += 1
            continue
        x = o.endpoint[:n]
        r = original.scaled_residual(x)
        if r > filter_tol:
            counts["extraneous"] += 1
            continue
        candidates.append(o.endpoint)
        residuals.append(max(r, o.residual))
    keep = dedup(candidates, dedup_tol)
    points = [NormalPoint(candidates[i][:n].copy(), candidates[i][n:].copy(), residuals[i]) for i in keep]
    if not points:
        log.warning("normal locus has no finite solutions; the Euclidean distance degree is zero")
    paths = len(solve.outcomes)
    expected = multihomogeneous_count(system, groups)
    if paths != expected:
        raise AssertionError(f"{paths} paths but multihomogeneous count is {expected}")
    return NormalLocusResult(
        points=points,
        paths_followed=paths,
        p0=p0,
        seed=seed,
        squared=sq,
        duplicates=len(candidates) - len(keep),
        wall_time=time.perf_counter() - t0,
        projection=None if projection is None else np.asarray(projection, dtype=float),
        **counts,
    )
