"""Tests for the ``htf`` command line."""
from __future__ import annotations

import json

import numpy as np
import pytest

from htf.main import main
from htf.services.estimator import load_estimate


@pytest.fixture
def sample_file(tmp_path):
    """500 standard normal draws, one per line."""
    path = tmp_path / "sample.txt"
    values = np.random.default_rng(3).normal(size=500)
    path.write_text("\n".join(f"{v:.17g}" for v in values) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def bench_config(tmp_path):
    path = tmp_path / "bench.json"
    path.write_text(
        json.dumps({"densities": ["uniform"], "sizes": [150], "replicates": 2, "methods": ["kde_ref"], "grid_size": 100}),
        encoding="utf-8",
    )
    return path


def test_fit_with_defaults(sample_file, tmp_path, capsys):
    """fit writes the estimate and a 1000-point curve."""
    out, curve = tmp_path / "est.json", tmp_path / "curve.csv"
    code = main(["fit", "--input", str(sample_file), "--output", str(out), "--curve", str(curve)])
    assert code == 0
    est = load_estimate(out)
    assert est.k == 1
    assert est.diagnostics.selection == "grid"
    lines = curve.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "x,fhat"
    assert len(lines) == 1001


def test_fit_to_stdout(sample_file, capsys):
    """Without --output the estimate JSON goes to stdout."""
    assert main(["fit", "--input", str(sample_file), "--tau", "5", "--bins", "30", "--k", "0"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["version"] == 1
    assert doc["k"] == 0
    assert doc["diagnostics"]["tau"] == 5.0
    assert len(doc["values"]) == 30


def test_fit_rejects_bad_line(tmp_path, capsys):
    """A non-numeric line is a usage error naming the line."""
    path = tmp_path / "bad.txt"
    path.write_text("0.1\n0.2\nabc\n0.4\n", encoding="utf-8")
    assert main(["fit", "--input", str(path)]) == 2
    assert "line 3" in capsys.readouterr().err


def test_fit_rejects_one_bin(sample_file, capsys):
    """--bins 1 fails argument parsing."""
    assert main(["fit", "--input", str(sample_file), "--bins", "1"]) == 2
    assert "bins must be >= 2" in capsys.readouterr().err


def test_fit_tau_flags_are_exclusive(sample_file, capsys):
    """--tau and --tau-auto cannot be combined."""
    assert main(["fit", "--input", str(sample_file), "--tau", "1", "--tau-auto", "path"]) == 2


def test_fit_missing_input(tmp_path, capsys):
    """A missing input file is a usage error."""
    assert main(["fit", "--input", str(tmp_path / "nope.txt")]) == 2


def test_fit_unbounded_problem(tmp_path, capsys):
    """tau=0 without the box and with an empty bin is a usage error."""
    path = tmp_path / "gap.txt"
    path.write_text("0.0\n0.1\n0.9\n1.0\n", encoding="utf-8")
    code = main(["fit", "--input", str(path), "--tau", "0", "--bins", "4", "--k", "0", "--no-box"])
    assert code == 2
    assert "tau=0" in capsys.readouterr().err


def test_eval_round_trip(sample_file, tmp_path, capsys):
    """eval reproduces the estimate at the given points."""
    est_path = tmp_path / "est.json"
    assert main(["fit", "--input", str(sample_file), "--output", str(est_path)]) == 0
    points = tmp_path / "points.txt"
    points.write_text("0.0\n\n100.0\n", encoding="utf-8")
    capsys.readouterr()
    assert main(["eval", "--estimate", str(est_path), "--points", str(points)]) == 0
    rows = capsys.readouterr().out.splitlines()
    assert rows[0] == "x,fhat"
    assert len(rows) == 3
    assert float(rows[1].split(",")[1]) > 0.0
    assert float(rows[2].split(",")[1]) == 0.0


def test_eval_rejects_bad_estimate(tmp_path, capsys):
    """A document without a version is a usage error."""
    est_path = tmp_path / "est.json"
    est_path.write_text(json.dumps({"k": 1}), encoding="utf-8")
    points = tmp_path / "points.txt"
    points.write_text("0.0\n", encoding="utf-8")
    assert main(["eval", "--estimate", str(est_path), "--points", str(points)]) == 2


def test_path_command(sample_file, tmp_path, capsys):
    """path prints one row per tau and writes the JSON."""
    out = tmp_path / "path.json"
    assert main(["path", "--input", str(sample_file), "--output", str(out)]) == 0
    rows = capsys.readouterr().out.splitlines()
    assert rows[0].split("\t") == ["tau", "aic", "active_diffs", "converged", "selected"]
    assert len(rows) == 6
    assert sum(row.endswith("*") for row in rows[1:]) == 1
    doc = json.loads(out.read_text(encoding="utf-8"))
    assert doc["lambda_star"] > 0.0
    assert len(doc["entries"]) == 5


def test_path_dense(sample_file, capsys):
    """The dense grid has --count entries."""
    assert main(["path", "--input", str(sample_file), "--grid", "dense", "--count", "7"]) == 0
    assert len(capsys.readouterr().out.splitlines()) == 8


def test_bench_command(bench_config, tmp_path, capsys):
    """bench writes both reports and reruns identically."""
    first, second = tmp_path / "a", tmp_path / "b"
    assert main(["bench", "--config", str(bench_config), "--out-dir", str(first)]) == 0
    assert main(["bench", "--config", str(bench_config), "--out-dir", str(second)]) == 0
    assert (first / "report.tsv").is_file()
    cells_a = json.loads((first / "report.json").read_text(encoding="utf-8"))["cells"]
    cells_b = json.loads((second / "report.json").read_text(encoding="utf-8"))["cells"]
    assert [c["mse"] for c in cells_a] == [c["mse"] for c in cells_b]
    assert "kde_ref" in capsys.readouterr().out


def test_bench_missing_config(tmp_path, capsys):
    """A missing config is a usage error."""
    assert main(["bench", "--config", str(tmp_path / "none.json"), "--out-dir", str(tmp_path)]) == 2


def test_check_first_differences(capsys):
    """k=0, D=2: the ratio 0.25 is outside the interval."""
    assert main(["check", "--k", "0", "--d", "2"]) == 0
    rows = capsys.readouterr().out.splitlines()
    D, _, ratio, verdict = rows[1].split("\t")
    assert D == "2"
    assert float(ratio) == pytest.approx(0.25)
    assert verdict == "outside"
    assert rows[-1].startswith("all_inside=no")


def test_check_largest_entry_inside(capsys):
    """The largest-entry norm for second differences lands in the interval."""
    assert main(["check", "--norm", "max", "--d", "500"]) == 0
    out = capsys.readouterr().out
    assert "\tinside" in out
    assert "all_inside=yes" in out


def test_check_range_validation(capsys):
    """dmin above dmax is a usage error."""
    assert main(["check", "--dmin", "600", "--dmax", "500"]) == 2
    assert "exceeds" in capsys.readouterr().err


def test_unknown_subcommand(capsys):
    """argparse failures map to exit code 2."""
    assert main(["frobnicate"]) == 2


def test_log_level_flag(sample_file, tmp_path, capsys):
    """--log-file receives the INFO records of a fit."""
    log_path = tmp_path / "htf.log"
    code = main(["--log-level", "info", "--log-file", str(log_path), "fit", "--input", str(sample_file),
                 "--output", str(tmp_path / "e.json")])
    assert code == 0
    assert "density fitted" in log_path.read_text(encoding="utf-8")


def test_seed_is_logged_not_used(sample_file, tmp_path, capsys):
    """--seed only reaches the log; the estimate is identical for any seed."""
    log_path = tmp_path / "htf.log"
    outs = []
    for seed in ("0", "7"):
        out = tmp_path / f"est-{seed}.json"
        code = main(["--log-level", "info", "--log-file", str(log_path), "fit", "--input", str(sample_file),
                     "--seed", seed, "--output", str(out)])
        assert code == 0
        outs.append(out.read_text(encoding="utf-8"))
    assert outs[0] == outs[1]
    assert "seed=7" in log_path.read_text(encoding="utf-8")
    assert main(["path", "--input", str(sample_file), "--seed", "3"]) == 0
