"""Predictor-corrector path tracking from t = 1 to t = 0.

The predictor integrates the Davidenko equation ``dz/dt = -J_z^{-1} J_t``
with one classical Runge-Kutta step; the corrector is plain Newton at the
new ``t``. Below ``endgame_t`` the tracker tries to finish with Newton at
``t = 0`` after every accepted step and otherwise keeps shrinking ``t``
geometrically, which is where diverging and singular paths get classified.

Residuals are scaled: ``max_i |H_i| / (1 + sum_a |c_a z^a|)``.
"""

from __future__ import annotations

import enum
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as sla
from scipy.linalg import lapack

from . import kernels
from .algebra import Poly, PolySystem

log = logging.getLogger(__name__)


class HomotopyProblem:
    """A square family ``H(z, t)`` with Jacobians in ``z`` and ``t``.

    ``evaluator(z, t, want_jac)`` returns ``(H, J_z, J_t, scale)``;
    ``J_z``/``J_t`` may be ``None`` when ``want_jac`` is false.
    """

    def __init__(self, dim: int, evaluator: Callable, label: str = ""):
        self.dim = dim
        self._evaluator = evaluator
        self.label = label

    def evaluate(self, z, t: float, want_jac: bool = True):
        return self._evaluator(z, t, want_jac)

    def residual(self, z, t: float) -> float:
        vals, _, _, scale = self.evaluate(z, t, False)
        return _scaled(vals, scale)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(dim={self.dim}, label={self.label!r})"


class PolyHomotopy(HomotopyProblem):
    """Homotopy given as polynomials in ``(z_1..z_N, t)``, ``t`` last."""

    def __init__(self, system: PolySystem, label: str = ""):
        n = system.ambient_dim - 1
        if len(system) != n:
            raise ValueError(f"homotopy is not square: {len(system)} equations, {n} unknowns")
        self.system = system
        super().__init__(n, None, label)
        self._compiled = system.compiled

    def evaluate(self, z, t: float, want_jac: bool = True):
        zt = np.empty(self.dim + 1, dtype=np.complex128)
        zt[: self.dim] = z
        zt[self.dim] = t
        vals, jac, scale = self._compiled.evaluate(zt, want_jac)
        if jac is None:
            return vals, None, None, scale
        return vals, jac[:, : self.dim], jac[:, self.dim], scale

    def __getstate__(self):
        return {"system": self.system, "label": self.label}

    def __setstate__(self, state):
        self.__init__(state["system"], state["label"])


def linear_homotopy(target: Sequence[Poly], start: Sequence[Poly], gamma: complex, label: str = "") -> PolyHomotopy:
    """``(1 - t) * target + gamma * t * start`` as a :class:`PolyHomotopy`."""
    n = len(target)
    if len(start) != n or any(p.num_vars != n for p in list(target) + list(start)):
        raise ValueError("target and start must be square systems of the same size")
    N = n + 1
    idx = list(range(n))
    tvar = Poly.variable(N, n)
    one_minus_t = 1.0 - tvar
    polys = [
        one_minus_t * f.embed(N, idx) + (gamma * tvar) * g.embed(N, idx)
        for f, g in zip(target, start)
    ]
    names = [f"z{i}" for i in range(n)] + ["t"]
    return PolyHomotopy(PolySystem(names, polys), label)


@dataclass(frozen=True)
class TrackerConfig:
    newton_tol: float = 1e-10
    max_newton_iters: int = 3
    initial_step: float = 0.05
    min_step: float = 1e-14
    max_step: float = 0.1
    step_expand_after: int = 4
    step_expand_factor: float = 2.0
    step_cut_factor: float = 0.5
    divergence_norm: float = 1e8
    endgame_t: float = 1e-6
    final_tol: float = 1e-12
    singular_cond: float = 1e12
    max_steps: int = 10000
    # largest first Newton correction accepted, relative to 1 + |z|
    max_correction: float = 0.05
    finish_iters: int = 8
    # largest Newton correction accepted while finishing at t = 0, relative to 1 + |z|
    finish_radius: float = 1e-2

    def __post_init__(self):
        if not 0 < self.min_step < self.initial_step <= self.max_step < 1:
            raise ValueError("need 0 < min_step < initial_step <= max_step < 1")
        for name in ("newton_tol", "final_tol", "divergence_norm", "endgame_t", "singular_cond"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.step_cut_factor < 1 or self.step_expand_factor <= 1:
            raise ValueError("step factors out of range")
        if self.max_newton_iters < 1 or self.max_steps < 1 or self.step_expand_after < 1:
            raise ValueError("iteration limits must be positive")


class PathStatus(str, enum.Enum):
    CONVERGED = "converged"
    SINGULAR = "singular"
    DIVERGED = "diverged"
    TRUNCATED = "truncated"


@dataclass
class PathOutcome:
    status: PathStatus
    endpoint: np.ndarray
    t_final: float
    residual: float
    condition_estimate: float
    steps: int
    start_index: int = -1
    rejected: int = 0
    path: list | None = field(default=None, repr=False)

    @property
    def finite(self) -> bool:
        return self.status in (PathStatus.CONVERGED, PathStatus.SINGULAR)


@dataclass
class NewtonResult:
    point: np.ndarray
    residual: float
    iterations: int
    converged: bool
    condition_estimate: float = float("nan")
    corrections: list = field(default_factory=list)


def _scaled(vals, scale) -> float:
    if len(vals) == 0:
        return 0.0
    return float(np.max(np.abs(vals) / (1.0 + scale)))


def condition_estimate(J: np.ndarray) -> float:
    """1-norm condition number estimate from the LU factors (LAPACK gecon)."""
    if J.size == 0:
        return 1.0
    if not np.all(np.isfinite(J)):
        return float("inf")
    anorm = np.linalg.norm(J, 1)
    lu, _ = sla.lu_factor(J, check_finite=False)
    rcond, info = lapack.zgecon(lu, anorm, norm="1")
    if info != 0 or rcond <= 0:
        return float("inf")
    return float(1.0 / rcond)


def newton_correct(
    H: HomotopyProblem, t: float, z, tol: float = 1e-10, max_iters: int = 3
) -> NewtonResult:
    """Newton iterations on ``H(., t)`` until the scaled residual drops below ``tol``."""
    z = np.array(z, dtype=np.complex128)
    corrections = []
    for it in range(max_iters + 1):
        vals, Jz, _, scale = H.evaluate(z, t, True)
        res = _scaled(vals, scale)
        if not np.isfinite(res):
            return NewtonResult(z, res, it, False, float("inf"), corrections)
        if res < tol:
            return NewtonResult(z, res, it, True, corrections=corrections)
        if it == max_iters:
            break
        try:
            dz = np.linalg.solve(Jz, -vals)
        except np.linalg.LinAlgError:
            return NewtonResult(z, res, it, False, float("inf"), corrections)
        corrections.append(float(np.linalg.norm(dz)))
        z = z + dz
    return NewtonResult(z, res, max_iters, False, condition_estimate(Jz), corrections)


def _tangent(H: HomotopyProblem, z, t):
    _, Jz, Jt, _ = H.evaluate(z, t, True)
    return np.linalg.solve(Jz, -Jt)


def _rk4(H: HomotopyProblem, z, t, dt):
    k1 = _tangent(H, z, t)
    k2 = _tangent(H, z + 0.5 * dt * k1, t + 0.5 * dt)
    k3 = _tangent(H, z + 0.5 * dt * k2, t + 0.5 * dt)
    k4 = _tangent(H, z + dt * k3, t + dt)
    return z + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _finish(H: HomotopyProblem, z, cfg: TrackerConfig):
    """Newton at t = 0 to ``final_tol``; returns (point, residual, converged, corrections)."""
    corrections = []
    res = float("inf")
    for _ in range(cfg.finish_iters + 1):
        vals, Jz, _, scale = H.evaluate(z, 0.0, True)
        res = _scaled(vals, scale)
        if not np.isfinite(res):
            return z, res, False, corrections
        if res <= cfg.final_tol:
            return z, res, True, corrections
        try:
            dz = np.linalg.solve(Jz, -vals)
        except np.linalg.LinAlgError:
            return z, res, False, corrections
        if not np.all(np.isfinite(dz)):
            return z, res, False, corrections
        step = float(np.linalg.norm(dz))
        # a real endpoint is close and Newton contracts towards it; anything else
        # is Newton wandering off to an unrelated solution
        if step > cfg.finish_radius * (1.0 + float(np.linalg.norm(z))):
            return z, res, False, corrections
        if corrections and step > corrections[-1]:
            return z, res, False, corrections
        corrections.append(step)
        z = z + dz
    return z, res, False, corrections


def _classify_end(H: HomotopyProblem, z, res, corrections, cfg: TrackerConfig, steps, rejected, path):
    # a couple of refinement steps; they also expose linear (non-quadratic) convergence
    best_z, best_res = z, res
    for _ in range(2):
        vals, Jz, _, scale = H.evaluate(z, 0.0, True)
        try:
            dz = np.linalg.solve(Jz, -vals)
        except np.linalg.LinAlgError:
            break
        if not np.all(np.isfinite(dz)):
            break
        corrections.append(float(np.linalg.norm(dz)))
        z = z + dz
        r = H.residual(z, 0.0)
        if r <= best_res:
            best_z, best_res = z, r
    _, Jz, _, _ = H.evaluate(best_z, 0.0, True)
    cond = condition_estimate(Jz)
    floor = 1e-11 * (1.0 + float(np.max(np.abs(best_z), initial=0.0)))
    linear = False
    for a, b in zip(corrections, corrections[1:]):
        if a > floor:
            linear = b > 0.1 * a
    status = PathStatus.SINGULAR if (cond > cfg.singular_cond or linear) else PathStatus.CONVERGED
    return PathOutcome(status, best_z, 0.0, best_res, cond, steps, rejected=rejected, path=path)


FINISHED, DIVERGED, TRUNCATED = 0, 1, 2


def _track_loop_py(H: HomotopyProblem, start, cfg: TrackerConfig, record: bool = False):
    """Reference tracking loop; same contract as the compiled ``track_core``."""
    z = np.array(start, dtype=np.complex128)
    t = 1.0
    h = cfg.initial_step
    successes = 0
    steps = rejected = 0
    path = [(t, z.copy())] if record else None
    nan = float("nan")

    while steps < cfg.max_steps:
        if t <= cfg.endgame_t:
            zf, res, ok, corr = _finish(H, z, cfg)
            if ok:
                return FINISHED, zf, 0.0, res, steps, rejected, corr, path
            if t < cfg.min_step:
                break
            t1 = max(t - h, 0.25 * t)
        else:
            t1 = max(t - h, 0.0)
            if t1 < cfg.endgame_t:
                t1 = cfg.endgame_t
        dt = t1 - t
        steps += 1
        ok = False
        try:
            zp = _rk4(H, z, t, dt)
            if np.all(np.isfinite(zp)):
                nr = newton_correct(H, t1, zp, cfg.newton_tol, cfg.max_newton_iters)
                scale = 1.0 + float(np.max(np.abs(zp)))
                ok = nr.converged and (
                    not nr.corrections or nr.corrections[0] <= cfg.max_correction * scale
                )
        except np.linalg.LinAlgError:
            ok = False
        if ok:
            z, t = nr.point, t1
            if record:
                path.append((t, z.copy()))
            if float(np.max(np.abs(z))) > cfg.divergence_norm:
                return DIVERGED, z, t, nan, steps, rejected, [], path
            successes += 1
            if successes >= cfg.step_expand_after:
                h = min(h * cfg.step_expand_factor, cfg.max_step)
                successes = 0
        else:
            rejected += 1
            successes = 0
            h *= cfg.step_cut_factor
            if h < cfg.min_step:
                break
    kind = DIVERGED if float(np.max(np.abs(z))) > cfg.divergence_norm else TRUNCATED
    return kind, z, t, nan, steps, rejected, [], path


def _compiled_evaluator(H):
    if kernels.track_core is None or not isinstance(H, PolyHomotopy):
        return None
    ev = H._compiled._eval
    return ev if isinstance(ev, kernels.Evaluator) else None


def track_path(
    H: HomotopyProblem,
    start,
    cfg: TrackerConfig | None = None,
    record: bool = False,
) -> PathOutcome:
    """Track one solution path of ``H`` from ``t = 1`` to ``t = 0``.

    Polynomial homotopies run in the compiled loop when the extension is
    available; other problems (and the pure-Python build) use the reference
    loop. Finished paths are refined and classified here in both cases.
    """
    cfg = cfg or TrackerConfig()
    ev = _compiled_evaluator(H)
    if ev is not None:
        result = kernels.track_core(ev, start, cfg, record)
    else:
        result = _track_loop_py(H, start, cfg, record)
    kind, z, t, res, steps, rejected, corr, path = result
    if kind == FINISHED:
        return _classify_end(H, z, res, list(corr), cfg, steps, rejected, path)
    status = PathStatus.DIVERGED if kind == DIVERGED else PathStatus.TRUNCATED
    return PathOutcome(status, z, t, H.residual(z, t), float("nan"), steps, rejected=rejected, path=path)




def _track_chunk(args):
    H, items, cfg = args
    out = []
    for i, s in items:
        o = track_path(H, s, cfg)
        o.start_index = i
        out.append(o)
    return out


def track_all(
    H: HomotopyProblem,
    starts: Sequence,
    cfg: TrackerConfig | None = None,
    workers: int = 1,
) -> list[PathOutcome]:
    """Track every start point; outcomes are returned in start order."""
    cfg = cfg or TrackerConfig()
    items = list(enumerate(starts))
    if workers <= 1 or len(items) < 2:
        return _track_chunk((H, items, cfg))
    chunks = [items[k::workers] for k in range(workers)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        results = [o for part in pool.map(_track_chunk, [(H, c, cfg) for c in chunks]) for o in part]
    return sorted(results, key=lambda o: o.start_index)


def jacobian_error(H: HomotopyProblem, z, t: float, h: float = 1e-5) -> float:
    """Relative mismatch between ``[J_z | J_t]`` and central differences of ``H``."""
    z = np.asarray(z, dtype=np.complex128)
    _, Jz, Jt, _ = H.evaluate(z, t, True)
    J = np.column_stack([Jz, Jt])
    fd = np.empty_like(J)
    for j in range(H.dim):
        e = np.zeros(H.dim)
        e[j] = h
        fd[:, j] = (H.evaluate(z + e, t, False)[0] - H.evaluate(z - e, t, False)[0]) / (2 * h)
    fd[:, H.dim] = (H.evaluate(z, t + h, False)[0] - H.evaluate(z, t - h, False)[0]) / (2 * h)
    return float(np.linalg.norm(J - fd) / max(1.0, np.linalg.norm(J)))
