import json
import os
import subprocess
import sys

import numpy as np
import pytest

from bottleneckhc.cli import emit_plot, main, orthogonal_projection

SYSTEMS = os.path.join(os.path.dirname(__file__), "..", "systems")
ELLIPSE = os.path.join(SYSTEMS, "ellipse.sys")


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_bottlenecks_ellipse_json(capsys, tmp_path):
    csv_path = tmp_path / "pairs.csv"
    code, out, _ = run(
        ["bottlenecks", "--x", ELLIPSE, "--y", ELLIPSE, "--symmetric", "--seed", "7", "--pairs-csv", str(csv_path)],
        capsys,
    )
    assert code == 0
    rep = json.loads(out)
    assert len(rep["real_pairs"]) == 2
    assert sorted(p["distance"] for p in rep["real_pairs"]) == pytest.approx([2.0, 4.0], abs=1e-8)
    cfg = rep["config"]
    for key in ("gamma", "p0", "seed", "tracker", "tolerances", "square_seeds"):
        assert key in cfg
    assert cfg["seed"] == 7
    lines = csv_path.read_text().strip().splitlines()
    assert lines[0].split(",") == ["x1", "x2", "y1", "y2", "distance"] and len(lines) == 3


def test_reports_are_byte_identical(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"seed": 3, "bottlenecks": {"x": ELLIPSE}}))
    outs = []
    for k in range(2):
        path = tmp_path / f"r{k}.json"
        assert main(["bottlenecks", "--config", str(cfg), "--out", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_config_and_flag_precedence(capsys, tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"seed": 3, "tracker": {"max_steps": 4000}, "tolerances": {"real": 1e-7}}))
    code, out, _ = run(["normal-locus", "--config", str(cfg), "--system", "@ellipse", "--max-steps", "5000"], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["config"]["tracker"]["max_steps"] == 5000
    assert rep["config"]["tolerances"]["real"] == 1e-7
    assert rep["config"]["seed"] == 3
    assert rep["edd"] == 4 and rep["paths"] == 4
    assert rep["config"]["config_file"]["tracker"] == {"max_steps": 4000}


def test_gamma_and_p0_override(capsys, tmp_path):
    p0 = tmp_path / "p0.txt"
    p0.write_text("0.3,0.1\n-0.2\n")
    code, out, _ = run(["bottlenecks", "--x", "@ellipse", "--gamma", "0.6,0.8", "--p0", str(p0)], capsys)
    assert code == 0
    cfg = json.loads(out)["config"]
    assert cfg["gamma"] == pytest.approx([0.6, 0.8])
    assert cfg["p0"] == [[0.3, 0.1], [-0.2, 0.0]]


@pytest.mark.parametrize(
    "argv",
    [
        ["bottlenecks", "--x", "missing.sys"],
        ["bottlenecks", "--x", "@ellipse", "--gamma", "2,0"],
        ["bottlenecks", "--x", "@ellipse", "--gamma", "abc"],
        ["bottlenecks", "--x", "@ellipse", "--unknown-flag"],
        ["bottlenecks", "--x", "@nonexistent"],
        ["bottlenecks"],
        ["frobnicate"],
        ["normal-locus", "--system", "@ellipse", "--threads", "0"],
        ["normal-locus", "--system", "@ellipse", "--tol-newton", "-1"],
        ["components", "--cloud", "missing.csv", "--r", "0.4"],
        ["components", "--cloud", "missing.csv", "--r", "-1"],
        ["bench", "--family", "unknown"],
        ["bench", "--family", "quadric-surfaces", "--n", "4"],
        ["sample", "--system", "@goursat", "--box=-1,1", "--spacing", "0.1", "--cloud-out", "x.csv"],
    ],
)
def test_validation_errors_exit_2(argv, capsys):
    assert main(argv) == 2


def test_malformed_system_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.sys"
    bad.write_text("vars: x,y;\ndim: 1;\nx^2 + * y;\n")
    code, _, err = run(["normal-locus", "--system", str(bad)], capsys)
    assert code == 2 and "line 3" in err


def test_bad_config_exit_2(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"bogus": 1}))
    assert main(["normal-locus", "--config", str(cfg), "--system", "@ellipse"]) == 2
    cfg.write_text("{not json")
    assert main(["normal-locus", "--config", str(cfg), "--system", "@ellipse"]) == 2


def test_strict_empty_normal_locus_exit_3(tmp_path, capsys):
    iso = tmp_path / "iso.sys"
    iso.write_text("vars: x,y;\ndim: 1;\nx + i*y - 1;\n")
    assert main(["normal-locus", "--system", str(iso)]) == 0
    assert main(["normal-locus", "--system", str(iso), "--strict"]) == 3


def test_bench_row(capsys):
    code, out, _ = run(["bench", "--family", "quadric-surfaces", "--n", "3"], capsys)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "Example | EDD | multihom | #solutions"
    assert lines[-1].endswith("36 | 24")
    assert "2·6+36" in lines[-1]


def test_bench_csv_with_direct(capsys):
    code, out, _ = run(["bench", "--family", "rnc", "--n", "3", "--format", "csv", "--direct"], capsys)
    assert code == 0
    assert out.strip().splitlines()[-1] == "Two rational normal curves in C^3,2·12+49,144,49"


def test_sample_and_components(tmp_path, capsys):
    cloud = tmp_path / "cloud.csv"
    code, out, _ = run(
        ["sample", "--system", "@two-ovals", "--box=-3,3", "--spacing", "0.05", "--r", "0.4",
         "--cloud-out", str(cloud)],
        capsys,
    )
    assert code == 0
    summary = json.loads(out)
    assert summary["components"] == 2 and summary["points"] > 100
    assert cloud.read_text().splitlines()[0] == "x1,x2,label"
    code, out, _ = run(["components", "--cloud", str(cloud), "--r", "0.4"], capsys)
    assert code == 0 and out.strip() == "2"
    code, out, _ = run(["bottlenecks", "--x", "@two-ovals", "--cloud", str(cloud)], capsys)
    rep = json.loads(out)
    assert rep["min_distance"] == pytest.approx(1.0, abs=1e-6)
    assert rep["min_cross_component_distance"] == pytest.approx(2.0, abs=1e-6)


def test_solve_direct_command(capsys):
    code, out, _ = run(["solve-direct", "--x", "@ellipse", "--seed", "2"], capsys)
    assert code == 0
    rep = json.loads(out)
    assert sorted(p["distance"] for p in rep["real_pairs"]) == pytest.approx([2.0, 4.0], abs=1e-8)
    assert rep["counts"]["paths"] == 16


def test_plot_ellipse_svg(tmp_path, capsys):
    report = tmp_path / "r.json"
    assert main(["bottlenecks", "--x", "@ellipse", "--seed", "7", "--out", str(report)]) == 0
    out_dir = tmp_path / "plot"
    assert main(["plot", "--report", str(report), "--out-dir", str(out_dir)]) == 0
    svg = (out_dir / "plot.svg").read_text()
    assert svg.count("<line") == 2
    assert (out_dir / "segments.csv").read_text().count("\n") == 3


def test_plot_nothing_is_noop(tmp_path, capsys):
    report = tmp_path / "r.json"
    report.write_text(json.dumps({"real_pairs": [], "x": {"vars": ["x", "y"]}}))
    code, out, err = run(["plot", "--report", str(report), "--out-dir", str(tmp_path / "p")], capsys)
    assert code == 0 and "nothing to plot" in err
    assert not (tmp_path / "p").exists()


def test_emit_plot_projects_high_dimensions(tmp_path):
    rng = np.random.default_rng(0)
    segs = rng.standard_normal((4, 2, 7))
    files = emit_plot(segs, tmp_path, cloud=rng.standard_normal((10, 7)), seed=1)
    names = sorted(os.path.basename(f) for f in files)
    assert names == ["points.csv", "segments.csv"]
    header = (tmp_path / "segments.csv").read_text().splitlines()[0]
    assert header == "a1,a2,a3,b1,b2,b3"
    P = orthogonal_projection(7, 3, 1)
    np.testing.assert_allclose(P @ P.T, np.eye(3), atol=1e-12)
    # orthogonal projection preserves nothing more than lengths of projections; check data
    first = np.array([float(c) for c in (tmp_path / "segments.csv").read_text().splitlines()[1].split(",")])
    np.testing.assert_allclose(first[:3], P @ segs[0, 0], atol=1e-12)


def test_projection_flag(tmp_path, capsys):
    M = tmp_path / "M.csv"
    M.write_text("1,0,0\n0,1,0\n0,0,1\n")
    code, out, _ = run(["bench", "--family", "quadric-surfaces", "--project", str(M)], capsys)
    assert code == 0 and out.strip().endswith("36 | 24")
    M.write_text("1,0\n0,1\n")
    assert main(["normal-locus", "--system", "@goursat", "--project", str(M)]) == 2


def test_threads_flag(capsys):
    code, out, _ = run(["bottlenecks", "--x", "@ellipse", "--seed", "7", "--threads", "2"], capsys)
    assert code == 0 and len(json.loads(out)["real_pairs"]) == 2


def test_console_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "bottleneckhc.cli", "components", "--cloud", "nope.csv", "--r", "1"],
        capture_output=True, text=True,
    )
    assert res.returncode == 2
