"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Criterion 7 is a check of a conjectured count and never fails the run.
Criterion 10 lists the runs that are excluded at desk scale.
"""

import logging
import time

import numpy as np
import pytest

from bottleneckhc.algebra import Poly, PolySystem, VariableGroups, square_system
from bottleneckhc.baseline import build_lagrange_system, same_pair_set, solve_direct
from bottleneckhc.bottleneck import (
    BottleneckRunConfig,
    build_main_homotopy,
    build_projected_homotopy,
    min_bottleneck_distance,
    normality_residual,
    run_bottlenecks,
)
from bottleneckhc.families import named
from bottleneckhc.multihom import linear_product_start, solve_square
from bottleneckhc.startsys import build_normal_locus_system, normal_locus_groups
from bottleneckhc.topology import label_points, rips_components, sample_curve
from bottleneckhc.tracking import PathStatus, TrackerConfig, jacobian_error, linear_homotopy

from conftest import record_acceptance, rnc, surface

log = logging.getLogger(__name__)


class Check:
    """Collects named conditions and reports them as one criterion line."""

    def __init__(self, number):
        self.number = number
        self.failures = []
        self.notes = []

    def expect(self, cond, what):
        if not cond:
            self.failures.append(what)
        return cond

    def note(self, text):
        self.notes.append(text)

    def finish(self, fatal=True):
        ok = not self.failures
        detail = "; ".join(self.notes)
        if not ok:
            detail += " | failed: " + "; ".join(self.failures)
        status = "PASS" if ok else ("FAIL" if fatal else "LOGGED")
        record_acceptance(self.number, status, detail)
        if not ok and fatal:
            pytest.fail(f"criterion {self.number}: " + "; ".join(self.failures))
        if not ok:
            log.warning("criterion %s check failed: %s", self.number, "; ".join(self.failures))


def timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def quadrics():
    return surface(2, 1), surface(2, 2)


def curves():
    return rnc(3, 1), rnc(3, 2)


@pytest.fixture(scope="session")
def run_quadrics():
    return timed(lambda: run_bottlenecks(*quadrics(), seed=0))


@pytest.fixture(scope="session")
def run_curves():
    return timed(lambda: run_bottlenecks(*curves(), seed=0))


@pytest.fixture(scope="session")
def run_ellipse():
    return timed(lambda: run_bottlenecks(named("ellipse"), seed=7))


def test_criterion_01_quadric_surfaces(run_quadrics):
    r, secs = run_quadrics
    c = r.counts()
    chk = Check(1)
    chk.note(f"EDD {c['edd_x']},{c['edd_y']}; paths {c['paths']}; pairs {c['pairs']}; diagonal {c['diagonal']}; {secs:.1f}s")
    chk.expect(c["edd_x"] == 6 and c["edd_y"] == 6, "EDD 6 each")
    chk.expect(c["paths"] == 36, "36 paths")
    chk.expect(c["pairs"] == 24, "24 pairs")
    chk.expect(c["diagonal"] == 12, "12 diagonal endpoints")
    chk.expect(secs < 60, "runtime < 60 s")
    chk.finish()


def test_criterion_02_rational_normal_curves(run_curves):
    r, secs = run_curves
    c = r.counts()
    chk = Check(2)
    chk.note(f"start paths {c['start_paths_x']},{c['start_paths_y']}; paths {c['paths']}; pairs {c['pairs']}; {secs:.1f}s")
    chk.expect(c["start_paths_x"] == 12 and c["start_paths_y"] == 12, "12 start paths per curve")
    chk.expect(c["paths"] == 49, "49 paths")
    chk.expect(c["pairs"] == 49, "49 pairs")
    chk.expect(secs < 60, "runtime < 60 s")
    chk.finish()


def test_criterion_03_cubic_surfaces():
    r, secs = timed(lambda: run_bottlenecks(surface(3, 1), surface(3, 2), seed=0))
    c = r.counts()
    chk = Check(3)
    chk.note(f"EDD {c['edd_x']},{c['edd_y']}; paths {c['paths']}; pairs {c['pairs']}; {secs:.1f}s")
    chk.expect(c["edd_x"] == 21 and c["edd_y"] == 21, "EDD 21 each")
    chk.expect(c["paths"] == 441, "441 paths")
    chk.expect(c["pairs"] == 396, "396 pairs")
    chk.expect(secs < 900, "runtime < 15 min")
    chk.finish()


def test_criterion_04_goursat():
    r, secs = timed(lambda: run_bottlenecks(named("goursat"), seed=0))
    c = r.counts()
    chk = Check(4)
    chk.note(
        f"EDD {c['edd_x']} from {c['start_paths_x']} paths; main paths {c['paths']}; "
        f"real bottlenecks {c['real_pairs']}; {secs:.1f}s"
    )
    chk.expect(c["start_paths_x"] == 108, "108 start paths")
    chk.expect(c["edd_x"] == 52, "EDD 52")
    chk.expect(c["paths"] == 1326, "1326 main paths")
    chk.expect(c["real_pairs"] == 13, "13 real bottlenecks")
    chk.expect(secs < 900, "runtime < 15 min")
    chk.finish()


def test_criterion_05_ellipse(run_ellipse):
    r, _ = run_ellipse
    d = solve_direct(named("ellipse"), seed=7)
    got = sorted(p.distance for p in r.real_pairs)
    direct = sorted(p.distance for p in d.real_pairs)
    chk = Check(5)
    chk.note(f"real distances {got}; direct solve {direct}")
    chk.expect(len(got) == 2, "exactly 2 real bottlenecks")
    chk.expect(len(got) == 2 and abs(got[0] - 2.0) <= 1e-8 and abs(got[1] - 4.0) <= 1e-8, "distances 2 and 4 to 1e-8")
    chk.expect(len(direct) == 2 and np.allclose(direct, [2.0, 4.0], atol=1e-8, rtol=0), "direct solve agrees")
    chk.finish()


def test_criterion_06_oracle_equivalence(run_quadrics, run_curves, run_ellipse):
    chk = Check(6)
    for label, (r, _), (X, Y), paths in (
        ("quadrics", run_quadrics, quadrics(), 36),
        ("curves", run_curves, curves(), 144),
        ("ellipse", run_ellipse, (named("ellipse"), None), None),
    ):
        d = solve_direct(X, Y, seed=11)
        same = same_pair_set(d.solutions, r.pairs, 1e-6)
        chk.note(f"{label}: direct paths {d.paths}, pairs {len(d.solutions)}/{len(r.pairs)}, equal {same}")
        chk.expect(same, f"{label} pair sets equal within 1e-6")
        if paths is not None:
            chk.expect(d.paths == paths, f"{label} direct paths {paths}")
    chk.finish()


def test_criterion_07_diagonal_conjecture(run_quadrics):
    chk = Check(7)
    for (d, e), r in (
        ((2, 2), run_quadrics[0]),
        ((2, 3), run_bottlenecks(surface(2, 1), surface(3, 2), seed=0)),
    ):
        want = d * e * (d + e - 1)
        got = r.counts()["diagonal"]
        chk.note(f"(d,e)=({d},{e}): diagonal {got}, de(d+e-1) = {want}")
        chk.expect(got == want, f"({d},{e}) diagonal count")
    chk.finish(fatal=False)


def _rotated_ellipse(Q, b):
    Qi = Q.T
    u = [Poly.linear(Qi[i], -(Qi[i] @ b)) for i in range(2)]
    return PolySystem(["x", "y"], [0.25 * u[0] ** 2 + u[1] ** 2 - 1], declared_dim=1)


def test_criterion_08_invariance(run_quadrics, run_ellipse):
    chk = Check(8)
    base = run_quadrics[0]
    for seed in (101, 202, 303):
        r = run_bottlenecks(*quadrics(), seed=seed)
        same = same_pair_set(r.pairs, base.pairs, 1e-6)
        chk.expect(r.counts()["pairs"] == base.counts()["pairs"], f"seed {seed} pair count")
        chk.expect(same, f"seed {seed} pair set within 1e-6")
    chk.note("3 reseeded quadric runs match")

    th = 1.1
    Q = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    b = np.array([-0.7, 2.3])
    ref = run_ellipse[0].real_pairs
    moved = run_bottlenecks(_rotated_ellipse(Q, b), seed=7).real_pairs
    chk.expect(len(moved) == len(ref), "same number of real pairs after the motion")
    worst = 0.0
    for p in ref:
        a, c = Q @ p.x.real + b, Q @ p.y.real + b
        err = min(
            min(np.max(np.abs(a - q.x.real)) + np.max(np.abs(c - q.y.real)),
                np.max(np.abs(a - q.y.real)) + np.max(np.abs(c - q.x.real)))
            for q in moved
        )
        worst = max(worst, err)
    dist_err = np.max(np.abs(np.sort([p.distance for p in moved]) - np.sort([p.distance for p in ref])))
    chk.note(f"rigid motion: pair error {worst:.1e}, distance error {dist_err:.1e}")
    chk.expect(worst <= 1e-8, "pairs map by Qz+b to 1e-8")
    chk.expect(dist_err <= 1e-8, "distances preserved to 1e-8")
    chk.finish()


def test_criterion_09_two_ovals():
    X = named("two-ovals")
    r = run_bottlenecks(X, seed=0)
    cloud = sample_curve(X, [(-3, 3), (-3, 3)], 0.05, seed=0)
    count, labels = rips_components(cloud, 0.4)
    lab = [
        (int(label_points(cloud, labels, p.x.real)[0]), int(label_points(cloud, labels, p.y.real)[0]))
        for p in r.real_pairs
    ]
    overall = min_bottleneck_distance(r.real_pairs)
    cross = min_bottleneck_distance(r.real_pairs, "cross_component", lab)
    chk = Check(9)
    chk.note(f"min {overall}; cross-component {cross}; {len(cloud)} samples, {count} components at r=0.4")
    chk.expect(overall.found and abs(overall.value - 1.0) <= 1e-6, "overall minimum 1.0")
    chk.expect(cross.found and abs(cross.value - 2.0) <= 1e-6, "cross-component minimum 2.0")
    chk.expect(count == 2, "2 Rips components")
    chk.finish()


def test_criterion_10_excluded_runs():
    record_acceptance(
        10,
        "EXCLUDED",
        "cycloheptane (100128 paths) and the C^7..C^9 benchmark rows are not run here",
    )


def _homotopies():
    """Every kind of homotopy the package builds, on small instances."""
    F, G = quadrics()
    cfg = BottleneckRunConfig().resolved(0, 3)
    out = {"main": build_main_homotopy(F, G, cfg)}
    cfg.projection = np.random.default_rng(1).standard_normal((2, 3))
    out["projected"] = build_projected_homotopy(F, G, cfg)
    sq = square_system(rnc(3, 0), 0)
    N = build_normal_locus_system(sq, np.ones(3) * (0.3 + 0.1j))
    groups = VariableGroups.from_system(N, normal_locus_groups(3, 2))
    start = linear_product_start(N, groups, np.random.default_rng(2))
    out["normal-locus"] = linear_homotopy(N.polys, start.polys, np.exp(0.3j))
    L, g = build_lagrange_system(F, G, np.ones(2) * (1 + 1j), np.ones(2) * (2 - 1j))
    start = linear_product_start(L, VariableGroups.from_system(L, g), np.random.default_rng(3))
    out["direct"] = linear_homotopy(L.polys, start.polys, np.exp(1.3j))
    X = named("two-ovals")
    cut = PolySystem(X.vars, list(X.polys) + [Poly.variable(2, 0) - 1.5])
    start = linear_product_start(cut, VariableGroups.from_system(cut, [[0, 1]]), np.random.default_rng(4))
    out["slice"] = linear_homotopy(cut.polys, start.polys, np.exp(2.1j))
    return out


def test_criterion_11_numerical_properties(run_quadrics, run_curves, run_ellipse):
    chk = Check(11)
    rng = np.random.default_rng(0)
    worst = 0.0
    for name, H in _homotopies().items():
        for _ in range(20):
            z = rng.standard_normal(H.dim) + 1j * rng.standard_normal(H.dim)
            worst = max(worst, jacobian_error(H, z, float(rng.random())))
    chk.note(f"Jacobian vs finite differences: worst relative error {worst:.1e}")
    chk.expect(worst <= 1e-6, "Jacobians within 1e-6")

    final = TrackerConfig().final_tol
    res, nres, converged = 0.0, 0.0, 0
    for r, _ in (run_quadrics, run_curves, run_ellipse):
        for o in r.outcomes:
            if o.status is PathStatus.CONVERGED:
                converged += 1
                res = max(res, o.residual)
        for p in r.pairs:
            F, G = r.start_x.squared.original, r.start_y.squared.original
            d = p.x - p.y
            nres = max(nres, normality_residual(F, p.x, d), normality_residual(G, p.y, -d))
    # start systems too
    for X in (surface(2, 1), rnc(3, 1), named("ellipse")):
        sq = square_system(X, 0)
        N = build_normal_locus_system(sq, rng.standard_normal(X.ambient_dim) + 0j)
        sol = solve_square(N, normal_locus_groups(X.ambient_dim, sq.codim), None, 0)
        for o in sol.outcomes:
            if o.status is PathStatus.CONVERGED:
                converged += 1
                res = max(res, o.residual)
    chk.note(f"{converged} converged endpoints, worst residual {res:.1e}; worst normality residual {nres:.1e}")
    chk.expect(res <= 1e-12, "converged residuals <= 1e-12")
    chk.expect(nres <= 1e-8, "normality residuals <= 1e-8")
    chk.finish()
