"""Sampling real curves by hyperplane slices and counting Rips components."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .algebra import Poly, PolySystem, square_system
from .bottleneck import derived_seed, is_real_point
from .multihom import solve_square
from .tracking import PathStatus, TrackerConfig

log = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-8


@dataclass
class SampleCloud:
    points: np.ndarray  # (m, n) real
    source: str = ""
    residual_bound: float = 0.0
    max_gap: float = 0.0
    slices: int = 0
    paths: int = 0

    def __len__(self) -> int:
        return len(self.points)

    @property
    def dim(self) -> int:
        return self.points.shape[1] if self.points.ndim == 2 else 0


@dataclass
class RipsGraph:
    radius: float
    edges: np.ndarray  # (k, 2) int
    labels: np.ndarray
    count: int = 0

    @property
    def num_components(self) -> int:
        return self.count


def _grid(lo: float, hi: float, spacing: float) -> np.ndarray:
    m = int(np.floor((hi - lo) / spacing + 1e-9))
    return lo + spacing * np.arange(m + 1)


def _abs_residual(system: PolySystem, x) -> float:
    return float(np.max(np.abs(system.compiled.values(x))))


def nearest_gap(points: np.ndarray) -> float:
    """Largest distance from a point to its nearest neighbour."""
    if len(points) < 2:
        return 0.0
    d, _ = cKDTree(points).query(points, k=2)
    return float(d[:, 1].max())


def sample_curve(
    spec: PolySystem,
    box,
    spacing: float,
    cfg: TrackerConfig | None = None,
    seed: int = 0,
    residual_tol: float = RESIDUAL_TOL,
    real_tol: float = 1e-6,
) -> SampleCloud:
    """Real points of a curve on the axis-aligned hyperplanes ``x_k = c``.

    ``box`` is a list of ``(lo, hi)`` per coordinate and the slice values run
    over ``lo, lo + spacing, ...`` in each. Every slice is solved by a
    total-degree homotopy; real in-box solutions are kept when the original
    equations vanish to ``residual_tol`` and are merged at ``spacing / 10``.
    """
    if spec.declared_dim != 1:
        raise ValueError("sample_curve needs a system declared as a curve (dim: 1)")
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    n = spec.ambient_dim
    box = np.asarray(box, dtype=float)
    if box.shape != (n, 2) or np.any(box[:, 1] < box[:, 0]):
        raise ValueError(f"box must be {n} pairs (lo, hi) with lo <= hi")
    sq = square_system(spec, derived_seed(seed, "sample-square")).squared
    found, worst, slices, paths = [], 0.0, 0, 0
    for k in range(n):
        for j, c in enumerate(_grid(box[k, 0], box[k, 1], spacing)):
            cut = Poly.variable(n, k) - float(c)
            system = PolySystem(spec.vars, list(sq.polys) + [cut])
            solve = solve_square(
                system, [list(range(n))], cfg, derived_seed(seed, f"slice-{k}-{j}"), name="slice"
            )
            slices += 1
            paths += len(solve.outcomes)
            for o in solve.outcomes:
                if o.status not in (PathStatus.CONVERGED, PathStatus.SINGULAR):
                    continue
                z = o.endpoint
                if not is_real_point(z, real_tol):
                    continue
                x = z.real.copy()
                x[k] = c
                if np.any(x < box[:, 0] - 1e-12) or np.any(x > box[:, 1] + 1e-12):
                    continue
                r = _abs_residual(spec, x.astype(complex))
                if r >= residual_tol:
                    continue
                worst = max(worst, r)
                found.append(x)
    pts = np.array(found, dtype=float).reshape(-1, n)
    if len(pts):
        pts = _merge(pts, spacing / 10)
    else:
        log.warning("no real points of the curve in the sampling box")
    return SampleCloud(pts, source=" ; ".join(map(str, spec.polys)), residual_bound=worst,
                       max_gap=nearest_gap(pts), slices=slices, paths=paths)


def _merge(points: np.ndarray, tol: float) -> np.ndarray:
    """Keep the first of every group of points closer than ``tol``."""
    tree = cKDTree(points)
    keep = np.ones(len(points), dtype=bool)
    for i in range(len(points)):
        if keep[i]:
            for j in tree.query_ball_point(points[i], tol):
                if j > i:
                    keep[j] = False
    return points[keep]


def rips_graph(points, r: float) -> RipsGraph:
    """Graph with an edge between points at distance in ``(0, 2r)``."""
    if r <= 0:
        raise ValueError("r must be positive")
    pts = np.asarray(points, dtype=float)
    m = len(pts)
    if m == 0:
        return RipsGraph(r, np.zeros((0, 2), dtype=int), np.zeros(0, dtype=int), 0)
    pairs = cKDTree(pts).query_pairs(2 * r, output_type="ndarray")
    if len(pairs):
        d = np.linalg.norm(pts[pairs[:, 0]] - pts[pairs[:, 1]], axis=1)
        pairs = pairs[(d > 0) & (d < 2 * r)]
    adj = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(m, m))
    count, labels = connected_components(adj, directed=False)
    return RipsGraph(r, pairs, labels, int(count))


def rips_components(cloud, r: float) -> tuple[int, np.ndarray]:
    pts = cloud.points if isinstance(cloud, SampleCloud) else cloud
    g = rips_graph(pts, r)
    return g.count, g.labels


def label_points(cloud, labels, queries) -> np.ndarray:
    """Component label of the nearest cloud point for each query point."""
    pts = cloud.points if isinstance(cloud, SampleCloud) else np.asarray(cloud, dtype=float)
    if len(pts) == 0:
        raise ValueError("empty cloud")
    _, idx = cKDTree(pts).query(np.asarray(queries, dtype=float).reshape(-1, pts.shape[1]))
    return np.asarray(labels)[idx]


def write_cloud(path, points, labels=None) -> None:
    points = np.asarray(points, dtype=float)
    n = points.shape[1] if points.ndim == 2 else 0
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"x{k + 1}" for k in range(n)] + (["label"] if labels is not None else []))
        for i, p in enumerate(points):
            row = [repr(float(c)) for c in p]
            if labels is not None:
                row.append(int(labels[i]))
            w.writerow(row)


def read_cloud(path) -> tuple[np.ndarray, np.ndarray | None]:
    """Points and the label column (if present) from a CSV cloud."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty file")
    header = rows[0]
    has_label = bool(header) and header[-1] == "label"
    ncol = len(header) - has_label
    pts, labels = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise ValueError(f"{path}:{lineno}: expected {len(header)} columns, got {len(row)}")
        try:
            pts.append([float(c) for c in row[:ncol]])
            if has_label:
                labels.append(int(row[-1]))
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from None
    arr = np.array(pts, dtype=float).reshape(-1, ncol)
    return arr, (np.array(labels, dtype=int) if has_label else None)
