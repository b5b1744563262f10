"""Compare the compiled kernels with the pure-Python fallback.

Two measurements per implementation:

* evaluation throughput of the main bottleneck homotopy (values and
  Jacobian at random points), in-process;
* end-to-end wall time of bottleneck runs, each in a fresh interpreter so
  that ``BOTTLENECKHC_PURE_PYTHON`` selects the kernels at import.

Usage: python3 benchmarks/bench_kernels.py [--repeat 3] [--families quadric-surfaces,rnc,cubic-surfaces]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np

RUN = """
import json, sys, time
from bottleneckhc import kernels
from bottleneckhc.bottleneck import run_bottlenecks
from bottleneckhc.families import make_family
fam = make_family(sys.argv[1], int(sys.argv[2]), 0)
t0 = time.perf_counter()
r = run_bottlenecks(fam.x, fam.y, seed=0)
print(json.dumps({"impl": kernels.IMPLEMENTATION, "time": time.perf_counter() - t0, "pairs": len(r.pairs)}))
"""


def eval_throughput(repeat: int) -> dict:
    from bottleneckhc import _kernels_py
    from bottleneckhc.bottleneck import BottleneckRunConfig, build_main_homotopy
    from bottleneckhc.families import make_family

    try:
        from bottleneckhc import _kernels
    except ImportError:
        _kernels = None
    fam = make_family("cubic-surfaces", 3, 0)
    cfg = BottleneckRunConfig(gamma=1j, p0=np.ones(3, dtype=complex))
    H = build_main_homotopy(fam.x, fam.y, cfg)
    tables = H._compiled.tables
    pts = np.random.default_rng(0).standard_normal((2000, tables.num_vars)) * (1 + 0j)
    out = {}
    for name, mod in (("python", _kernels_py), ("cython", _kernels)):
        if mod is None:
            continue
        ev = mod.Evaluator(tables)
        best = np.inf
        for _ in range(repeat):
            t0 = time.perf_counter()
            for z in pts:
                ev(z, True)
            best = min(best, time.perf_counter() - t0)
        out[name] = len(pts) / best
    return out


def end_to_end(family: str, n: int, pure: bool, repeat: int) -> dict:
    env = dict(os.environ, BOTTLENECKHC_PURE_PYTHON="1" if pure else "0")
    runs = []
    for _ in range(repeat):
        res = subprocess.run(
            [sys.executable, "-c", RUN, family, str(n)], env=env, capture_output=True, text=True, check=True
        )
        runs.append(json.loads(res.stdout.strip().splitlines()[-1]))
    return {"impl": runs[0]["impl"], "time": min(r["time"] for r in runs), "pairs": runs[0]["pairs"]}


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--families", default="quadric-surfaces,rnc,cubic-surfaces")
    args = ap.parse_args(argv)

    thr = eval_throughput(args.repeat)
    print("Evaluation of the cubic-surface bottleneck homotopy (values + Jacobian)")
    for k, v in thr.items():
        print(f"  {k:7s} {v:10.0f} evals/s")
    if len(thr) == 2:
        print(f"  speedup {thr['cython'] / thr['python']:.1f}x")

    print()
    print("Family | n | python (s) | compiled (s) | speedup | pairs")
    print("--- | --- | --- | --- | --- | ---")
    for fam in args.families.split(","):
        n = 3
        py = end_to_end(fam, n, True, args.repeat)
        cy = end_to_end(fam, n, False, args.repeat)
        if cy["impl"] != "cython":
            print(f"{fam} | {n} | {py['time']:.2f} | (extension not built) | - | {py['pairs']}")
            continue
        if py["pairs"] != cy["pairs"]:
            print(f"warning: pair counts differ ({py['pairs']} vs {cy['pairs']})", file=sys.stderr)
        print(f"{fam} | {n} | {py['time']:.2f} | {cy['time']:.2f} | {py['time'] / cy['time']:.1f}x | {cy['pairs']}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
