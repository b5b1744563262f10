"""Command-line front end.

Exit codes: 0 success, 2 invalid input or configuration, 3 numerical failure
(a failed pipeline stage, or with ``--strict`` an empty normal locus, a pair
count above the bound, or truncated paths).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from dataclasses import fields, replace

import numpy as np

from . import kernels
from . import report as rep
from .algebra import ParseError, PolySystem, format_system, multihomogeneous_count, parse_system
from .baseline import build_lagrange_system, solve_direct
from .bottleneck import (
    BottleneckRunConfig,
    StageError,
    derived_seed,
    min_bottleneck_distance,
    run_bottlenecks,
)
from .families import FAMILIES, NAMED, make_family, named
from .startsys import solve_normal_locus
from .topology import label_points, read_cloud, rips_components, sample_curve, write_cloud
from .tracking import PathStatus, TrackerConfig

log = logging.getLogger("bottleneckhc")

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3


class ValidationError(Exception):
    pass


class NumericalFailure(Exception):
    pass


# ---------------------------------------------------------------- config

TOP_KEYS = {"seed", "gamma", "p0", "tracker", "tolerances", "threads", "strict", "project"}
TOL_KEYS = {"real", "dedup", "diag", "filter", "normality"}
TRACKER_KEYS = {f.name for f in fields(TrackerConfig)}


def _load_config(path) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise ValidationError(f"{path}: top level must be an object")
    return cfg


def _check_keys(block: dict, allowed: set, where: str) -> None:
    extra = set(block) - allowed
    if extra:
        raise ValidationError(f"unknown key(s) in {where}: {', '.join(sorted(extra))}")


def _pick(cli_value, block: dict, key: str, default=None):
    if cli_value is not None:
        return cli_value
    return block.get(key, default)


def _parse_gamma(text) -> complex | None:
    if text is None:
        return None
    try:
        if isinstance(text, (list, tuple)):
            re_, im_ = (float(v) for v in text)
        else:
            re_, im_ = (float(v) for v in str(text).split(","))
    except ValueError:
        raise ValidationError(f"--gamma expects 're,im', got {text!r}") from None
    g = complex(re_, im_)
    if not np.isfinite(g) or abs(abs(g) - 1.0) > 1e-9:
        raise ValidationError(f"gamma must lie on the unit circle, |gamma| = {abs(g):.6g}")
    return g / abs(g)


def _read_complex_vector(path) -> np.ndarray:
    """One coordinate per line, ``re`` or ``re,im``; ``#`` starts a comment."""
    out = []
    try:
        with open(path) as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                parts = [p.strip() for p in line.split(",")]
                try:
                    vals = [float(p) for p in parts]
                except ValueError:
                    raise ValidationError(f"{path}:{lineno}: not a number: {line!r}") from None
                if len(vals) not in (1, 2):
                    raise ValidationError(f"{path}:{lineno}: expected 're' or 're,im'")
                out.append(complex(vals[0], vals[1] if len(vals) == 2 else 0.0))
    except OSError as exc:
        raise ValidationError(f"cannot read p0 file: {exc}") from None
    return np.array(out, dtype=complex)


def _read_matrix(path) -> np.ndarray:
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
        M = np.array([[float(c) for c in r] for r in rows], dtype=float)
    except OSError as exc:
        raise ValidationError(f"cannot read projection matrix: {exc}") from None
    except ValueError as exc:
        raise ValidationError(f"{path}: malformed matrix: {exc}") from None
    if M.ndim != 2 or M.size == 0 or not np.all(np.isfinite(M)):
        raise ValidationError(f"{path}: projection matrix must be a non-empty finite 2D table")
    return M


def _read_system(spec: str) -> PolySystem:
    """A system file, or ``@name`` for a built-in example."""
    if spec.startswith("@"):
        try:
            return named(spec[1:])
        except ValueError as exc:
            raise ValidationError(str(exc)) from None
    try:
        with open(spec) as fh:
            text = fh.read()
    except OSError as exc:
        raise ValidationError(f"cannot read system: {exc}") from None
    try:
        return parse_system(text)
    except ParseError as exc:
        raise ValidationError(f"{spec}: {exc}") from None
    except ValueError as exc:
        raise ValidationError(f"{spec}: {exc}") from None


class Settings:
    """Effective configuration: defaults, then config file, then flags."""

    def __init__(self, args, block_name: str | None = None):
        cfg = _load_config(getattr(args, "config", None))
        blocks = {"normal-locus", "bottlenecks", "solve-direct", "bench", "sample", "components", "plot"}
        _check_keys(cfg, TOP_KEYS | blocks, "config")
        self.block = cfg.get(block_name, {}) if block_name else {}
        if not isinstance(self.block, dict):
            raise ValidationError(f"config block '{block_name}' must be an object")
        tracker_block = cfg.get("tracker", {})
        tol_block = cfg.get("tolerances", {})
        _check_keys(tracker_block, TRACKER_KEYS, "tracker")
        _check_keys(tol_block, TOL_KEYS, "tolerances")

        self.seed = int(_pick(args.seed, cfg, "seed", 0))
        self.threads = int(_pick(args.threads, cfg, "threads", 1))
        if self.threads < 1:
            raise ValidationError("--threads must be at least 1")
        self.strict = bool(args.strict or cfg.get("strict", False))
        self.gamma = _parse_gamma(_pick(args.gamma, cfg, "gamma"))

        tk = dict(tracker_block)
        for flag, key in (("tol_newton", "newton_tol"), ("tol_final", "final_tol"), ("max_steps", "max_steps")):
            if getattr(args, flag) is not None:
                tk[key] = getattr(args, flag)
        try:
            self.tracker = TrackerConfig(**tk)
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"tracker settings: {exc}") from None

        self.tol = {
            "real": _pick(args.tol_real, tol_block, "real", 1e-6),
            "dedup": _pick(args.tol_dedup, tol_block, "dedup", 1e-6),
            "diag": _pick(args.diag_tol, tol_block, "diag", 1e-6),
            "filter": tol_block.get("filter", 1e-8),
            "normality": tol_block.get("normality", 1e-8),
        }
        for k, v in self.tol.items():
            if not (isinstance(v, (int, float)) and v > 0):
                raise ValidationError(f"tolerance '{k}' must be a positive number")

        p0 = _pick(args.p0, cfg, "p0")
        if isinstance(p0, str):
            p0 = _read_complex_vector(p0)
        elif p0 is not None:
            p0 = rep.from_cvec(p0) if p0 and isinstance(p0[0], list) else np.asarray(p0, dtype=complex)
        self.p0 = p0
        proj = _pick(getattr(args, "project", None), cfg, "project")
        self.projection = _read_matrix(proj) if isinstance(proj, str) else (
            None if proj is None else np.asarray(proj, dtype=float)
        )
        self.raw = cfg

    def run_config(self, symmetric: bool) -> BottleneckRunConfig:
        return BottleneckRunConfig(
            gamma=self.gamma,
            p0=self.p0,
            symmetric=symmetric,
            diag_tol=self.tol["diag"],
            real_tol=self.tol["real"],
            dedup_tol=self.tol["dedup"],
            filter_tol=self.tol["filter"],
            normality_tol=self.tol["normality"],
            projection=self.projection,
            workers=self.threads,
        )

    def check_dim(self, n: int) -> None:
        if self.p0 is not None and self.p0.shape != (n,):
            raise ValidationError(f"p0 has {self.p0.size} coordinates, the ambient dimension is {n}")
        if self.projection is not None and (self.projection.shape[1] != n or self.projection.shape[0] > n):
            raise ValidationError(f"projection must be m x {n} with m <= {n}, got {self.projection.shape}")

    def echo(self) -> dict:
        return {
            "seed": self.seed,
            "threads": self.threads,
            "strict": self.strict,
            "tracker": rep.tracker_dict(self.tracker),
            "tolerances": dict(self.tol),
            "config_file": self.raw,
        }


# ---------------------------------------------------------------- output


def _write_text(path, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _emit_json(args, obj) -> None:
    if getattr(args, "timings", False) is False:
        obj = _strip_timings(obj)
    _write_text(getattr(args, "out", None), rep.dumps(obj))


def _strip_timings(obj):
    if isinstance(obj, dict):
        return {k: _strip_timings(v) for k, v in obj.items() if k not in ("timings", "wall_time")}
    if isinstance(obj, list):
        return [_strip_timings(v) for v in obj]
    return obj


def orthogonal_projection(n: int, k: int, seed: int) -> np.ndarray:
    """``k x n`` matrix with orthonormal rows from the QR factor of a seeded Gaussian matrix."""
    from .rng import stream

    A = stream(seed, "plot-projection").standard_normal((n, k))
    Q, R = np.linalg.qr(A)
    Q = Q * np.sign(np.diag(R))
    return Q.T


def emit_plot(pairs, out_dir, cloud=None, projection=None, seed: int = 0) -> list[str]:
    """Write plot data for real pairs and an optional sample cloud.

    ``pairs`` is an ``(m, 2, n)`` array. Files: ``segments.csv``,
    ``points.csv`` (when a cloud is given) and ``plot.svg`` for planar data.
    Data in more than three dimensions is first mapped to ``R^3`` by
    ``projection`` or a seeded random orthogonal projection.
    """
    segs = np.asarray(pairs, dtype=float)
    pts = None if cloud is None else np.asarray(cloud, dtype=float)
    if segs.size == 0 and (pts is None or pts.size == 0):
        log.warning("nothing to plot")
        return []
    n = segs.shape[2] if segs.size else pts.shape[1]
    segs = segs.reshape(-1, 2, n)
    if n > 3:
        P = orthogonal_projection(n, 3, seed) if projection is None else np.asarray(projection, dtype=float)
        segs = segs @ P.T
        pts = None if pts is None else pts @ P.T
        n = P.shape[0]
    os.makedirs(out_dir, exist_ok=True)
    written = []
    path = os.path.join(out_dir, "segments.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"a{k + 1}" for k in range(n)] + [f"b{k + 1}" for k in range(n)])
        for a, b in segs:
            w.writerow([repr(float(c)) for c in np.concatenate([a, b])])
    written.append(path)
    if pts is not None:
        path = os.path.join(out_dir, "points.csv")
        write_cloud(path, pts)
        written.append(path)
    if n == 2:
        path = os.path.join(out_dir, "plot.svg")
        with open(path, "w") as fh:
            fh.write(rep.svg_plot(segs, () if pts is None else pts))
        written.append(path)
    return written


# ---------------------------------------------------------------- commands


def _systems_block(spec: PolySystem) -> dict:
    return {"text": format_system(spec), "dim": spec.declared_dim, "vars": list(spec.vars)}


def cmd_normal_locus(args) -> int:
    st = Settings(args, "normal-locus")
    spec = _read_system(_require(args.system, st.block, "system"))
    st.check_dim(spec.ambient_dim)
    t0 = time.perf_counter()
    try:
        res = solve_normal_locus(
            spec, st.p0, st.tracker, st.seed, st.projection, st.tol["filter"], st.tol["dedup"], st.threads
        )
    except (ArithmeticError, np.linalg.LinAlgError, AssertionError) as exc:
        raise NumericalFailure(str(exc)) from exc
    out = {
        "command": "normal-locus",
        "config": {**st.echo(), "p0": rep.cvec(res.p0), "square_seed": st.seed},
        "system": _systems_block(spec),
        "edd": res.edd,
        "paths": res.paths_followed,
        "counts": {
            "divergent": res.divergent,
            "singular": res.singular,
            "truncated": res.truncated,
            "extraneous": res.extraneous,
            "duplicates": res.duplicates,
        },
        "points": [{"x": rep.cvec(p.x), "v": rep.cvec(p.v), "residual": p.residual} for p in res.points],
        "implementation": kernels.IMPLEMENTATION,
        "wall_time": time.perf_counter() - t0,
    }
    _emit_json(args, out)
    if st.strict and res.edd == 0:
        raise NumericalFailure("normal locus is empty (Euclidean distance degree 0)")
    return EXIT_OK


def _require(cli_value, block, key):
    v = _pick(cli_value, block, key)
    if v is None:
        raise ValidationError(f"missing required option --{key}")
    return v


def _xy(args, st):
    x = _read_system(_require(args.x, st.block, "x"))
    ypath = _pick(args.y, st.block, "y")
    symmetric = bool(args.symmetric or st.block.get("symmetric", False))
    y = _read_system(ypath) if ypath is not None else None
    if y is None:
        symmetric = True
    if x.ambient_dim != (y or x).ambient_dim:
        raise ValidationError("X and Y live in different ambient dimensions")
    if symmetric and y is not None and y != x:
        raise ValidationError("--symmetric needs identical X and Y")
    st.check_dim(x.ambient_dim)
    return x, (None if symmetric else y), symmetric


def _run_config_echo(st, cfg: BottleneckRunConfig, symmetric: bool) -> dict:
    return {
        **st.echo(),
        "gamma": [cfg.gamma.real, cfg.gamma.imag],
        "p0": rep.cvec(cfg.p0),
        "symmetric": symmetric,
        "square_seeds": {"x": derived_seed(st.seed, "square-x"), "y": derived_seed(st.seed, "square-y")},
        "projection": None if cfg.projection is None else cfg.projection.tolist(),
    }


def _cross_component(cloud_path, real_pairs, r):
    try:
        pts, labels = read_cloud(cloud_path)
    except (OSError, ValueError) as exc:
        raise ValidationError(f"cannot read cloud: {exc}") from None
    if labels is None:
        if r is None:
            raise ValidationError("cloud has no label column; pass --r to compute components")
        _, labels = rips_components(pts, r)
    lab = [
        (int(label_points(pts, labels, p.x.real)[0]), int(label_points(pts, labels, p.y.real)[0]))
        for p in real_pairs
    ]
    return lab, min_bottleneck_distance(real_pairs, "cross_component", lab)


def cmd_bottlenecks(args) -> int:
    st = Settings(args, "bottlenecks")
    x, y, symmetric = _xy(args, st)
    cfg = st.run_config(symmetric)
    try:
        rpt = run_bottlenecks(x, y, cfg, st.tracker, st.seed)
    except StageError as exc:
        if exc.stage == "config" and isinstance(exc.cause, ValueError):
            raise ValidationError(str(exc.cause)) from None
        raise NumericalFailure(str(exc)) from exc
    counts = rpt.counts()
    out = {
        "command": "bottlenecks",
        "config": _run_config_echo(st, rpt.config, symmetric),
        "x": _systems_block(x),
        "y": _systems_block(y) if y is not None else None,
        "counts": counts,
        "bound": rpt.bound,
        "pairs": [rep.pair_dict(p) for p in rpt.pairs],
        "real_pairs": [rep.pair_dict(p) for p in rpt.real_pairs],
        "min_distance": min_bottleneck_distance(rpt.real_pairs).value,
        "implementation": kernels.IMPLEMENTATION,
        "timings": rpt.timings,
    }
    cloud = _pick(args.cloud, st.block, "cloud")
    if cloud is not None:
        labels, md = _cross_component(cloud, rpt.real_pairs, _pick(args.r, st.block, "r"))
        out["pair_components"] = labels
        out["min_cross_component_distance"] = md.value
    if args.pairs_csv:
        rep.write_pairs_csv(args.pairs_csv, rpt.real_pairs)
    if args.plot_dir:
        segs = np.array([[p.x.real, p.y.real] for p in rpt.real_pairs]).reshape(-1, 2, x.ambient_dim)
        pts = read_cloud(cloud)[0] if cloud is not None else None
        emit_plot(segs, args.plot_dir, pts, seed=st.seed)
    _emit_json(args, out)
    if st.strict:
        problems = []
        if rpt.start_x.edd == 0 or rpt.start_y.edd == 0:
            problems.append("empty normal locus")
        if not rpt.within_bound:
            problems.append(f"{len(rpt.pairs)} pairs exceed the bound {rpt.bound}")
        if counts["truncated"]:
            problems.append(f"{counts['truncated']} truncated paths")
        if problems:
            raise NumericalFailure("; ".join(problems))
    return EXIT_OK


def cmd_solve_direct(args) -> int:
    st = Settings(args, "solve-direct")
    x, y, symmetric = _xy(args, st)
    if st.projection is not None:
        raise ValidationError("solve-direct does not support --project")
    cfg = st.run_config(symmetric)
    try:
        d = solve_direct(x, y, cfg, st.tracker, st.seed)
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        raise NumericalFailure(str(exc)) from exc
    out = {
        "command": "solve-direct",
        "config": {**st.echo(), "symmetric": symmetric},
        "x": _systems_block(x),
        "y": _systems_block(y) if y is not None else None,
        "counts": d.counts(),
        "pairs": [rep.pair_dict(p) for p in d.solutions],
        "real_pairs": [rep.pair_dict(p) for p in d.real_pairs],
        "min_distance": min_bottleneck_distance(d.real_pairs).value,
        "wall_time": d.wall_time,
    }
    if args.pairs_csv:
        rep.write_pairs_csv(args.pairs_csv, d.real_pairs)
    _emit_json(args, out)
    if st.strict and d.counts()["truncated"]:
        raise NumericalFailure(f"{d.counts()['truncated']} truncated paths")
    return EXIT_OK


def direct_path_count(x: PolySystem, y: PolySystem | None, seed: int = 0) -> int:
    """Multihomogeneous root count of the direct Lagrange formulation."""
    from .algebra import VariableGroups, square_system

    sx = square_system(x, derived_seed(seed, "square-x")).squared
    sy = sx if y is None else square_system(y, derived_seed(seed, "square-y")).squared
    system, groups = build_lagrange_system(sx, sy, np.ones(len(sx) + 1), np.ones(len(sy) + 1))
    return multihomogeneous_count(system, VariableGroups.from_system(system, groups))


def bench_row(family: str, n: int, seed: int, tracker=None, cfg=None, direct: bool = False) -> dict:
    fam = make_family(family, n, seed)
    cfg = cfg or BottleneckRunConfig()
    rpt = run_bottlenecks(fam.x, fam.y, cfg, tracker, seed)
    c = rpt.counts()
    starts = c["start_paths_x"] + c["start_paths_y"]
    if fam.y is None:
        edd = f"{c['start_paths_x']}+{c['paths']}"
    else:
        edd = f"2·{c['start_paths_x']}+{c['paths']}" if c["start_paths_x"] == c["start_paths_y"] else (
            f"{c['start_paths_x']}+{c['start_paths_y']}+{c['paths']}"
        )
    row = {
        "example": fam.label,
        "edd": edd,
        "edd_paths": starts + c["paths"],
        "multihom": direct_path_count(fam.x, fam.y, seed),
        "solutions": c["pairs"],
        "edd_time": sum(rpt.timings.values()),
    }
    if direct:
        d = solve_direct(fam.x, fam.y, cfg, tracker, seed)
        row["multihom"] = d.paths
        row["direct_solutions"] = len(d.solutions)
        row["multihom_time"] = d.wall_time
    return row


def format_bench(rows, fmt: str = "md", timings: bool = False) -> str:
    head = ["Example", "EDD", "multihom", "#solutions"]
    if timings:
        head += ["EDD time (s)", "multihom time (s)"]

    def cells(r):
        c = [r["example"], r["edd"], str(r["multihom"]), str(r["solutions"])]
        if timings:
            c += [f"{r['edd_time']:.2f}", f"{r['multihom_time']:.2f}" if "multihom_time" in r else "-"]
        return c

    if fmt == "csv":
        lines = [",".join(head)] + [",".join(cells(r)) for r in rows]
    else:
        lines = [" | ".join(head), " | ".join("---" for _ in head)] + [" | ".join(cells(r)) for r in rows]
    return "\n".join(lines) + "\n"


def cmd_bench(args) -> int:
    st = Settings(args, "bench")
    family = _require(args.family, st.block, "family")
    if family not in FAMILIES:
        raise ValidationError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")
    n = int(_pick(args.n, st.block, "n", 3))
    try:
        make_family(family, n, st.seed)
    except ValueError as exc:
        raise ValidationError(str(exc)) from None
    st.check_dim(n)
    try:
        row = bench_row(family, n, st.seed, st.tracker, st.run_config(False), args.direct)
    except StageError as exc:
        raise NumericalFailure(str(exc)) from exc
    _write_text(args.out, format_bench([row], args.format, args.timings))
    return EXIT_OK


def _parse_box(text, n: int):
    if isinstance(text, list):
        box = [tuple(map(float, b)) for b in text]
    else:
        try:
            box = [tuple(float(v) for v in part.split(",")) for part in str(text).split(";") if part.strip()]
        except ValueError:
            raise ValidationError(f"--box expects 'lo,hi' or 'lo,hi;lo,hi;...', got {text!r}") from None
    if len(box) == 1:
        box = box * n
    if len(box) != n or any(len(b) != 2 or b[0] > b[1] for b in box):
        raise ValidationError(f"--box needs {n} intervals lo,hi with lo <= hi")
    return box


def cmd_sample(args) -> int:
    st = Settings(args, "sample")
    spec = _read_system(_require(args.system, st.block, "system"))
    if spec.declared_dim != 1:
        raise ValidationError("sample needs a curve (declare 'dim: 1;')")
    box = _parse_box(_require(args.box, st.block, "box"), spec.ambient_dim)
    spacing = float(_require(args.spacing, st.block, "spacing"))
    if spacing <= 0:
        raise ValidationError("--spacing must be positive")
    cloud = sample_curve(spec, box, spacing, st.tracker, st.seed)
    labels = None
    r = _pick(args.r, st.block, "r")
    count = None
    if r is not None:
        count, labels = rips_components(cloud, float(r))
    out_csv = _require(args.cloud_out, st.block, "cloud_out")
    write_cloud(out_csv, cloud.points, labels)
    summary = {
        "command": "sample",
        "config": {**st.echo(), "box": box, "spacing": spacing},
        "system": _systems_block(spec),
        "points": len(cloud),
        "slices": cloud.slices,
        "paths": cloud.paths,
        "residual_bound": cloud.residual_bound,
        "max_nearest_gap": cloud.max_gap,
        "components": count,
        "cloud": out_csv,
    }
    _emit_json(args, summary)
    if st.strict and len(cloud) == 0:
        raise NumericalFailure("empty sample")
    return EXIT_OK


def cmd_components(args) -> int:
    st = Settings(args, "components")
    path = _require(args.cloud, st.block, "cloud")
    r = float(_require(args.r, st.block, "r"))
    if r <= 0:
        raise ValidationError("--r must be positive")
    try:
        pts, _ = read_cloud(path)
    except OSError as exc:
        raise ValidationError(f"cannot read cloud: {exc}") from None
    except ValueError as exc:
        raise ValidationError(str(exc)) from None
    count, labels = rips_components(pts, r)
    if args.labels_out:
        write_cloud(args.labels_out, pts, labels)
    sys.stdout.write(f"{count}\n")
    return EXIT_OK


def cmd_plot(args) -> int:
    st = Settings(args, "plot")
    segs = None
    rpath = _pick(args.report, st.block, "report")
    ppath = _pick(args.pairs, st.block, "pairs")
    if rpath is not None:
        try:
            with open(rpath) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read report: {exc}") from None
        real = data.get("real_pairs", [])
        segs = np.array(
            [[[c[0] for c in p["x"]], [c[0] for c in p["y"]]] for p in real], dtype=float
        )
        if segs.size == 0:
            segs = np.zeros((0, 2, len(data.get("x", {}).get("vars", [])) or 1))
    elif ppath is not None:
        try:
            segs = rep.read_pairs_csv(ppath)
        except (OSError, ValueError) as exc:
            raise ValidationError(f"cannot read pairs: {exc}") from None
    cloud = _pick(args.cloud, st.block, "cloud")
    pts = None
    if cloud is not None:
        try:
            pts = read_cloud(cloud)[0]
        except (OSError, ValueError) as exc:
            raise ValidationError(f"cannot read cloud: {exc}") from None
    if segs is None:
        segs = np.zeros((0, 2, pts.shape[1] if pts is not None else 1))
    out_dir = _require(args.out_dir, st.block, "out_dir")
    written = emit_plot(segs, out_dir, pts, st.projection if st.projection is not None and segs.shape[2] > 3 else None, st.seed)
    if not written:
        sys.stderr.write("nothing to plot\n")
    for w in written:
        sys.stdout.write(w + "\n")
    return EXIT_OK


# ---------------------------------------------------------------- parser


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("run settings")
    g.add_argument("--config", help="JSON configuration file")
    g.add_argument("--seed", type=int)
    g.add_argument("--gamma", help="override gamma as 're,im' (unit modulus)")
    g.add_argument("--p0", help="file with the generic point, one 're[,im]' per line")
    g.add_argument("--tol-newton", type=float, dest="tol_newton")
    g.add_argument("--tol-final", type=float, dest="tol_final")
    g.add_argument("--tol-real", type=float, dest="tol_real")
    g.add_argument("--tol-dedup", type=float, dest="tol_dedup")
    g.add_argument("--diag-tol", type=float, dest="diag_tol")
    g.add_argument("--max-steps", type=int, dest="max_steps")
    g.add_argument("--threads", type=int)
    g.add_argument("--strict", action="store_true", help="exit 3 on numerical warnings")
    g.add_argument("--project", help="projection matrix CSV (m x n)")
    g.add_argument("--out", help="output file (default stdout)")
    g.add_argument("--timings", action="store_true", help="include wall times in the output")
    g.add_argument("-v", "--verbose", action="count", default=0)


def build_parser() -> argparse.ArgumentParser:
    examples = ", ".join("@" + k for k in sorted(NAMED))
    p = argparse.ArgumentParser(
        prog="bottleneckhc",
        description=f"Bottlenecks of algebraic varieties by homotopy continuation. "
        f"System arguments take a file or a built-in example ({examples}).",
    )
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("normal-locus", help="solve the normal locus and report the EDD")
    s.add_argument("--system")
    s.set_defaults(func=cmd_normal_locus)

    for name, func, helptext in (
        ("bottlenecks", cmd_bottlenecks, "bottleneck pairs by the normal-locus homotopy"),
        ("solve-direct", cmd_solve_direct, "bottleneck pairs by the direct multihomogeneous solve"),
    ):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("--x")
        s.add_argument("--y")
        s.add_argument("--symmetric", action="store_true")
        s.add_argument("--pairs-csv", dest="pairs_csv", help="write real pairs as CSV")
        if name == "bottlenecks":
            s.add_argument("--cloud", help="labelled sample CSV for cross-component distances")
            s.add_argument("--r", type=float, help="Rips radius when the cloud has no labels")
            s.add_argument("--plot-dir", dest="plot_dir")
        s.set_defaults(func=func)

    s = sub.add_parser("bench", help="one row of the path-count benchmark table")
    s.add_argument("--family", help=", ".join(FAMILIES))
    s.add_argument("--n", type=int)
    s.add_argument("--format", choices=["md", "csv"], default="md")
    s.add_argument("--direct", action="store_true", help="also run the direct solve")
    s.set_defaults(func=cmd_bench)

    s = sub.add_parser("sample", help="sample a real curve on a hyperplane grid")
    s.add_argument("--system")
    s.add_argument("--box", help="'lo,hi' for every axis or 'lo,hi;lo,hi;...'")
    s.add_argument("--spacing", type=float)
    s.add_argument("--r", type=float, help="also label Rips components at this radius")
    s.add_argument("--cloud-out", dest="cloud_out", help="CSV for the sample")
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("components", help="count Vietoris-Rips components of a cloud")
    s.add_argument("--cloud")
    s.add_argument("--r", type=float)
    s.add_argument("--labels-out", dest="labels_out", help="write the cloud with a label column")
    s.set_defaults(func=cmd_components)

    s = sub.add_parser("plot", help="plot data for bottleneck pairs and clouds")
    s.add_argument("--report", help="JSON report of bottlenecks or solve-direct")
    s.add_argument("--pairs", help="pairs CSV")
    s.add_argument("--cloud")
    s.add_argument("--out-dir", dest="out_dir")
    s.set_defaults(func=cmd_plot)

    for sp in sub.choices.values():
        _common(sp)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_INVALID
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except ValidationError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVALID
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVALID
    except NumericalFailure as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERICAL
    except StageError as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
