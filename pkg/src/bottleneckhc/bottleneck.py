"""Bottleneck homotopy: assembly, tracking and endpoint classification.

The main homotopy in the unknowns ``(x, y, v, w)`` with path parameter ``t``
moves from pairs of normal-locus points at ``t = 1`` to the Lagrange system
of ``||x - y||^2`` on ``X x Y`` at ``t = 0``::

    F(x) = 0
    G(y) = 0
    g t (x - p0) + (1 - t)(x - y) - (g t + 1 - t) J_F(x)^T v = 0
    g t (y - p0) + (1 - t)(y - x) - (g t + 1 - t) J_G(y)^T w = 0

with ``g`` a random point of the unit circle. An optional linear projection
``M`` multiplies the first two terms of the normal rows by ``M^T M``.
"""

from __future__ import annotations

import itertools
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from . import rng as rng_mod
from .algebra import Poly, PolySystem, SquaredSystem, square_system
from .startsys import (
    DEDUP_TOL,
    FILTER_TOL,
    NormalLocusResult,
    apply_projector,
    normal_block,
    projector,
    solve_normal_locus,
)
from .tracking import PathOutcome, PathStatus, PolyHomotopy, TrackerConfig, track_all

log = logging.getLogger(__name__)


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class BottleneckRunConfig:
    gamma: complex | None = None
    p0: np.ndarray | None = None
    symmetric: bool = False
    diag_tol: float = 1e-6
    real_tol: float = 1e-6
    dedup_tol: float = DEDUP_TOL
    filter_tol: float = FILTER_TOL
    normality_tol: float = 1e-8
    projection: np.ndarray | None = None
    workers: int = 1

    def resolved(self, seed: int, n: int) -> "BottleneckRunConfig":
        """Copy with gamma and p0 drawn from the run seed when unset."""
        gamma = self.gamma
        if gamma is None:
            gamma = rng_mod.unit_complex(rng_mod.stream(seed, "gamma"))
        if abs(abs(gamma) - 1.0) > 1e-12:
            raise ValueError("gamma must have modulus one")
        p0 = self.p0
        if p0 is None:
            p0 = rng_mod.complex_normal(rng_mod.stream(seed, "p0"), n)
        p0 = np.asarray(p0, dtype=complex)
        if p0.shape != (n,):
            raise ValueError(f"p0 must have {n} coordinates")
        out = BottleneckRunConfig(**{**self.__dict__, "gamma": complex(gamma), "p0": p0})
        if out.projection is not None:
            out.projection = np.asarray(out.projection, dtype=float)
        return out


@dataclass
class BottleneckPair:
    x: np.ndarray
    y: np.ndarray
    v: np.ndarray
    w: np.ndarray
    sq_distance: complex
    is_real: bool
    residual_full: float
    normality_residual: float
    start_index: int = -1
    status: PathStatus = PathStatus.CONVERGED

    @property
    def distance(self) -> float | None:
        if not self.is_real:
            return None
        return float(np.linalg.norm(self.x.real - self.y.real))

    def key(self) -> np.ndarray:
        return np.concatenate([self.x, self.y])


@dataclass
class Classification:
    pairs: list[BottleneckPair]
    diagonal: int = 0
    divergent: int = 0
    singular: int = 0
    extraneous: int = 0
    truncated: int = 0
    duplicates: int = 0
    unverified: int = 0

    def counts(self) -> dict:
        return {
            "pairs": len(self.pairs),
            "real_pairs": sum(p.is_real for p in self.pairs),
            "diagonal": self.diagonal,
            "divergent": self.divergent,
            "singular": self.singular,
            "extraneous": self.extraneous,
            "truncated": self.truncated,
            "duplicates": self.duplicates,
            "unverified": self.unverified,
        }


def _sq(s) -> PolySystem:
    return s.squared if isinstance(s, SquaredSystem) else s


def _build(F, G, cfg: BottleneckRunConfig, P) -> PolyHomotopy:
    Fs, Gs = _sq(F), _sq(G)
    n = Fs.ambient_dim
    if Gs.ambient_dim != n:
        raise ValueError(f"ambient dimensions differ: {n} vs {Gs.ambient_dim}")
    a, b = len(Fs), len(Gs)
    N = 2 * n + a + b
    V = N + 1
    xi = list(range(n))
    yi = list(range(n, 2 * n))
    vi = list(range(2 * n, 2 * n + a))
    wi = list(range(2 * n + a, N))
    g = complex(cfg.gamma)
    p0 = np.asarray(cfg.p0, dtype=complex)
    t = Poly.variable(V, N)
    gt = g * t
    omt = 1.0 - t
    # (g t + 1 - t) multiplies the normal-direction terms
    lam = gt + omt
    X = [Poly.variable(V, k) for k in xi]
    Y = [Poly.variable(V, k) for k in yi]
    dir_x = [gt * (X[j] - p0[j]) + omt * (X[j] - Y[j]) for j in range(n)]
    dir_y = [gt * (Y[j] - p0[j]) + omt * (Y[j] - X[j]) for j in range(n)]
    dir_x = apply_projector(P, dir_x)
    dir_y = apply_projector(P, dir_y)

    def normal_rows(S, idx, mult, direction):
        rows = []
        for j in range(n):
            acc = Poly(V)
            for i in range(len(S)):
                d = S.derivatives[i][j]
                if not d.is_zero():
                    acc = acc + Poly.variable(V, mult[i]) * d.embed(V, idx)
            rows.append(direction[j] - lam * acc)
        return rows

    polys = [f.embed(V, xi) for f in Fs.polys]
    polys += [q.embed(V, yi) for q in Gs.polys]
    polys += normal_rows(Fs, xi, vi, dir_x)
    polys += normal_rows(Gs, yi, wi, dir_y)
    names = (
        [f"x{k + 1}" for k in range(n)]
        + [f"y{k + 1}" for k in range(n)]
        + [f"v{k + 1}" for k in range(a)]
        + [f"w{k + 1}" for k in range(b)]
        + ["t"]
    )
    label = "projected-bottleneck" if P is not None else "bottleneck"
    return PolyHomotopy(PolySystem(names, polys), label)


def build_main_homotopy(F, G, cfg: BottleneckRunConfig) -> PolyHomotopy:
    return _build(F, G, cfg, None)


def build_projected_homotopy(F, G, cfg: BottleneckRunConfig) -> PolyHomotopy:
    if cfg.projection is None:
        raise ValueError("projected homotopy needs a projection matrix")
    P = projector(cfg.projection, _sq(F).ambient_dim)
    return _build(F, G, cfg, P)


def assemble_start_points(S1: NormalLocusResult, S2: NormalLocusResult, symmetric: bool) -> list[np.ndarray]:
    """Start points ``(x, y, v, w)``; unordered off-diagonal pairs when symmetric."""
    if symmetric:
        pts = S1.points
        return [
            np.concatenate([p.x, q.x, p.v, q.v]) for p, q in itertools.combinations(pts, 2)
        ]
    return [np.concatenate([p.x, q.x, p.v, q.v]) for p in S1.points for q in S2.points]


def normality_residual(S: PolySystem, x, direction) -> float:
    """Relative least-squares residual of ``direction`` against the rows of ``J_S(x)``.

    Returns ``|J^T c - direction| / max(1, |direction|)`` for the best ``c``.
    """
    J = S.jacobian(np.asarray(x, dtype=complex))
    c, *_ = np.linalg.lstsq(J.T, direction, rcond=None)
    r = J.T @ c - direction
    return float(np.linalg.norm(r) / max(1.0, float(np.linalg.norm(direction))))


def is_real_point(z, real_tol: float) -> bool:
    return bool(np.all(np.abs(z.imag) <= real_tol * (1.0 + np.abs(z.real))))


def _canonical(x, y, v, w, tol: float = 1e-8):
    """Order ``(x, y)`` lexicographically by (Re, Im) per coordinate.

    Components closer than ``tol`` (relative) count as equal so that noise
    in a coordinate shared by both points does not decide the order.
    """
    kx = np.column_stack([x.real, x.imag]).ravel()
    ky = np.column_stack([y.real, y.imag]).ravel()
    scale = 1.0 + max(np.max(np.abs(kx)), np.max(np.abs(ky)))
    for a, b in zip(kx, ky):
        if abs(a - b) > tol * scale:
            return (x, y, v, w) if a < b else (y, x, w, v)
    return x, y, v, w


def _close(a, b, tol) -> bool:
    return np.linalg.norm(a - b) <= tol * (1.0 + np.linalg.norm(b))


def classify_endpoints(
    outcomes: list[PathOutcome],
    F_hat: PolySystem,
    G_hat: PolySystem,
    cfg: BottleneckRunConfig,
    a: int,
    b: int,
) -> Classification:
    """Sort endpoints into bottleneck pairs and the diagnostic buckets.

    Finite endpoints with ``|x - y| <= diag_tol (1 + |x|)`` go to the diagonal
    bucket whatever their conditioning (they lie on ``X cap Y``). Other
    singular endpoints are counted, not reported. Converged endpoints must
    satisfy the unsquared equations and both normality conditions before they
    become pairs; symmetric runs fold ``(x, y) ~ (y, x)``.
    """
    n = F_hat.ambient_dim
    P = projector(cfg.projection, n) if cfg.projection is not None else None
    out = Classification(pairs=[])
    Fc, Gc = F_hat.compiled, G_hat.compiled
    for o in outcomes:
        if o.status is PathStatus.DIVERGED:
            out.divergent += 1
            continue
        if o.status is PathStatus.TRUNCATED:
            out.truncated += 1
            continue
        z = o.endpoint
        x, y = z[:n], z[n : 2 * n]
        v, w = z[2 * n : 2 * n + a], z[2 * n + a : 2 * n + a + b]
        if np.linalg.norm(x - y) <= cfg.diag_tol * (1.0 + np.linalg.norm(x)):
            out.diagonal += 1
            continue
        if o.status is PathStatus.SINGULAR:
            out.singular += 1
            continue
        res = max(Fc.scaled_residual(x), Gc.scaled_residual(y))
        if res > cfg.filter_tol:
            out.extraneous += 1
            continue
        d = x - y
        if P is not None:
            d = P @ d
        nres = max(normality_residual(F_hat, x, d), normality_residual(G_hat, y, -d))
        if nres > cfg.normality_tol:
            out.unverified += 1
            log.debug("endpoint %d fails normality check (%.2e)", o.start_index, nres)
            continue
        if cfg.symmetric:
            x, y, v, w = _canonical(x, y, v, w)
        pair = BottleneckPair(
            x=x.copy(),
            y=y.copy(),
            v=v.copy(),
            w=w.copy(),
            sq_distance=complex(np.sum((x - y) ** 2)),
            is_real=is_real_point(np.concatenate([x, y]), cfg.real_tol),
            residual_full=res,
            normality_residual=nres,
            start_index=o.start_index,
            status=o.status,
        )
        keys = [pair.key()]
        if cfg.symmetric:
            keys.append(np.concatenate([pair.y, pair.x]))
        if any(_close(k, q.key(), cfg.dedup_tol) for k in keys for q in out.pairs):
            out.duplicates += 1
            continue
        out.pairs.append(pair)
    return out


def filter_real(pairs: list[BottleneckPair], real_tol: float = 1e-6) -> list[BottleneckPair]:
    """Real pairs with imaginary parts zeroed."""
    out = []
    for p in pairs:
        if is_real_point(np.concatenate([p.x, p.y]), real_tol):
            x, y = p.x.real.astype(complex), p.y.real.astype(complex)
            out.append(
                BottleneckPair(
                    x=x,
                    y=y,
                    v=p.v,
                    w=p.w,
                    sq_distance=complex(np.sum((x - y) ** 2).real),
                    is_real=True,
                    residual_full=p.residual_full,
                    normality_residual=p.normality_residual,
                    start_index=p.start_index,
                    status=p.status,
                )
            )
    return out


@dataclass
class MinDistance:
    value: float | None
    pair: BottleneckPair | None = None

    @property
    def found(self) -> bool:
        return self.value is not None

    def __str__(self) -> str:
        return "no real bottleneck" if self.value is None else f"{self.value:.12g}"


def min_bottleneck_distance(real_pairs, mode: str = "all", labels=None) -> MinDistance:
    """Smallest real bottleneck distance.

    ``mode="cross_component"`` needs ``labels``: one ``(label_x, label_y)``
    per pair, and only pairs joining different components are eligible.
    """
    if mode not in ("all", "cross_component"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "cross_component":
        if labels is None or len(labels) != len(real_pairs):
            raise ValueError("cross_component mode needs one label pair per bottleneck")
        eligible = [p for p, (lx, ly) in zip(real_pairs, labels) if lx != ly]
    else:
        eligible = list(real_pairs)
    eligible = [p for p in eligible if p.is_real]
    if not eligible:
        return MinDistance(None)
    best = min(eligible, key=lambda p: p.distance)
    return MinDistance(best.distance, best)


@dataclass
class RunReport:
    config: BottleneckRunConfig
    seed: int
    start_x: NormalLocusResult
    start_y: NormalLocusResult
    paths: int
    classification: Classification
    real_pairs: list[BottleneckPair]
    timings: dict = field(default_factory=dict)
    outcomes: list[PathOutcome] = field(default_factory=list, repr=False)

    @property
    def pairs(self) -> list[BottleneckPair]:
        return self.classification.pairs

    @property
    def bound(self) -> int:
        return self.start_x.edd * self.start_y.edd

    @property
    def within_bound(self) -> bool:
        return len(self.pairs) <= self.bound

    def counts(self) -> dict:
        c = {"paths": self.paths, "edd_x": self.start_x.edd, "edd_y": self.start_y.edd}
        c["start_paths_x"] = self.start_x.paths_followed
        c["start_paths_y"] = 0 if self.config.symmetric else self.start_y.paths_followed
        c.update(self.classification.counts())
        c["real_pairs"] = len(self.real_pairs)
        return c


def _stage(name, fn, timings):
    t0 = time.perf_counter()
    try:
        return fn()
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc
    finally:
        timings[name] = time.perf_counter() - t0


def derived_seed(seed: int, name: str) -> int:
    return int(rng_mod.stream(seed, name).integers(0, 2**62))


def run_bottlenecks(
    spec_x: PolySystem,
    spec_y: PolySystem | None = None,
    cfg: BottleneckRunConfig | None = None,
    tracker: TrackerConfig | None = None,
    seed: int = 0,
) -> RunReport:
    """Square, solve both normal loci, track the main homotopy, classify, filter."""
    cfg = cfg or BottleneckRunConfig()
    if spec_y is None:
        spec_y = spec_x
        cfg = BottleneckRunConfig(**{**cfg.__dict__, "symmetric": True})
    if cfg.symmetric and spec_y != spec_x:
        raise ValueError("symmetric mode needs identical input systems")
    timings: dict = {}
    n = spec_x.ambient_dim
    cfg = _stage("config", lambda: cfg.resolved(seed, n), timings)
    sq_x = _stage("square", lambda: square_system(spec_x, derived_seed(seed, "square-x")), timings)
    sq_y = sq_x if cfg.symmetric else _stage(
        "square", lambda: square_system(spec_y, derived_seed(seed, "square-y")), timings
    )
    S1 = _stage(
        "start-x",
        lambda: solve_normal_locus(
            sq_x, cfg.p0, tracker, derived_seed(seed, "start-x"), cfg.projection,
            cfg.filter_tol, cfg.dedup_tol, cfg.workers,
        ),
        timings,
    )
    S2 = S1 if cfg.symmetric else _stage(
        "start-y",
        lambda: solve_normal_locus(
            sq_y, cfg.p0, tracker, derived_seed(seed, "start-y"), cfg.projection,
            cfg.filter_tol, cfg.dedup_tol, cfg.workers,
        ),
        timings,
    )
    starts = _stage("assemble", lambda: assemble_start_points(S1, S2, cfg.symmetric), timings)
    builder = build_projected_homotopy if cfg.projection is not None else build_main_homotopy
    H = _stage("homotopy", lambda: builder(sq_x, sq_y, cfg), timings)
    outcomes = _stage("track", lambda: track_all(H, starts, tracker, cfg.workers), timings)
    cls = _stage(
        "classify",
        lambda: classify_endpoints(outcomes, sq_x.original, sq_y.original, cfg, sq_x.codim, sq_y.codim),
        timings,
    )
    real = filter_real(cls.pairs, cfg.real_tol)
    report = RunReport(cfg, seed, S1, S2, len(starts), cls, real, timings, outcomes)
    if not report.within_bound:
        log.warning(
            "%d pairs exceed the bound EDD(X) * EDD(Y) = %d", len(report.pairs), report.bound
        )
    return report
