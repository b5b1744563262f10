"""JSON/CSV/SVG output for runs."""

from __future__ import annotations

import csv
import json
from dataclasses import asdict

import numpy as np

from .tracking import TrackerConfig


def cvec(z) -> list:
    """Complex vector as a list of ``[re, im]``."""
    return [[float(c.real), float(c.imag)] for c in np.asarray(z, dtype=complex).ravel()]


def from_cvec(data) -> np.ndarray:
    return np.array([complex(re, im) for re, im in data], dtype=complex)


def tracker_dict(cfg: TrackerConfig) -> dict:
    return asdict(cfg)


def pair_dict(p) -> dict:
    return {
        "x": cvec(p.x),
        "y": cvec(p.y),
        "v": cvec(p.v),
        "w": cvec(p.w),
        "sq_distance": [p.sq_distance.real, p.sq_distance.imag],
        "is_real": bool(p.is_real),
        "distance": p.distance,
        "residual": p.residual_full,
        "normality_residual": p.normality_residual,
        "status": p.status.value,
    }


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False, default=_default) + "\n"


def _default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"cannot serialize {type(o).__name__}")


def finite_or_none(x):
    return None if x is None or not np.isfinite(x) else float(x)


def write_pairs_csv(path, pairs) -> None:
    """Real pairs, one per row: ``x1..xn, y1..yn, distance``."""
    n = len(pairs[0].x) if pairs else 0
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"x{k + 1}" for k in range(n)] + [f"y{k + 1}" for k in range(n)] + ["distance"])
        for p in pairs:
            w.writerow([repr(float(c)) for c in np.concatenate([p.x.real, p.y.real])] + [repr(p.distance)])


def read_pairs_csv(path) -> np.ndarray:
    """``(m, 2, n)`` array of real pair endpoints."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty file")
    n = (len(rows[0]) - 1) // 2
    data = [[float(c) for c in r[: 2 * n]] for r in rows[1:] if r]
    return np.array(data, dtype=float).reshape(-1, 2, n)


def svg_plot(segments, points=(), size: int = 480, margin: int = 24) -> str:
    """Static SVG: sample points in grey, each pair as a segment with red ends."""
    segs = np.asarray(segments, dtype=float).reshape(-1, 2, 2)
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    allp = np.vstack([segs.reshape(-1, 2), pts])
    lo, hi = allp.min(axis=0), allp.max(axis=0)
    span = float(max(hi - lo)) or 1.0
    s = (size - 2 * margin) / span

    def tr(p):
        # flip y for screen coordinates
        return margin + (p[0] - lo[0]) * s, size - margin - (p[1] - lo[1]) * s

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    for p in pts:
        x, y = tr(p)
        out.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="1.5" fill="#888"/>')
    for a, b in segs:
        (x1, y1), (x2, y2) = tr(a), tr(b)
        out.append(f'<line x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}" stroke="black" stroke-width="1"/>')
        out.append(f'<circle cx="{x1:.2f}" cy="{y1:.2f}" r="3" fill="red"/>')
        out.append(f'<circle cx="{x2:.2f}" cy="{y2:.2f}" r="3" fill="red"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
