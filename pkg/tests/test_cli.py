"""Command-line interface: subcommands, config handling, file outputs."""

import json
import shutil
import subprocess
import sys

import numpy as np
import pytest

from leapssn.cli import main
from leapssn.driver import TRACE_HEADER
from leapssn.suite import read_pgm, read_svm_data

SUMMARY_KEYS = {"problem", "solver", "seed", "status", "iterations",
                "linear_solves", "final_F", "final_grad_dual_norm",
                "wall_time_seconds", "exit_code"}


def _run(*argv):
    return main(list(argv))


def test_run_writes_trace_and_summary(tmp_path):
    out = tmp_path / "run"
    code = _run("run", "--problem", "partial_smooth", "--tol", "1e-10",
                "--out", str(out))
    assert code == 0
    lines = (out / "trace.csv").read_text().strip().splitlines()
    assert lines[0] == TRACE_HEADER
    assert float(lines[-1].split(",")[5]) <= 1e-10

    summary = json.loads((out / "summary.json").read_text())
    assert set(summary) == SUMMARY_KEYS
    assert summary["status"] == "converged"
    assert summary["exit_code"] == 0
    assert summary["solver"] == "leapssn"


def test_run_rejects_unknown_problem_without_writing(tmp_path):
    out = tmp_path / "nope"
    code = _run("run", "--problem", "belongs_to_no_suite", "--out", str(out))
    assert code == 1
    assert not out.exists()


def test_run_rejects_unknown_solver(tmp_path):
    code = _run("run", "--problem", "quadratic", "--solver", "bfgs",
                "--out", str(tmp_path / "x"))
    assert code == 1


def test_run_baseline_solver(tmp_path):
    out = tmp_path / "plain"
    code = _run("run", "--problem", "quadratic", "--solver", "plain",
                "--out", str(out))
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["solver"] == "plain"
    assert summary["linear_solves"] == 1


def test_run_x0_presets(tmp_path):
    out = tmp_path / "ones"
    code = _run("run", "--problem", "quadratic", "--x0", "ones",
                "--out", str(out))
    assert code == 0
    # an x0 file with the wrong length must be refused
    bad = tmp_path / "x0.txt"
    np.savetxt(bad, np.ones(3))
    code = _run("run", "--problem", "quadratic", "--x0", str(bad),
                "--out", str(tmp_path / "y"))
    assert code == 1


def test_run_is_deterministic(tmp_path):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert _run("run", "--problem", "svm", "--n", "2", "--seed", "1",
                    "--tol", "1e-6", "--out", str(out)) == 0
        outs.append((out / "trace.csv").read_bytes())
    assert outs[0] == outs[1]


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("problem = quadratic\n"
                   "tol = 1e-2      # deliberately loose\n")
    out1 = tmp_path / "from_file"
    assert _run("run", "--config", str(cfg), "--out", str(out1)) == 0
    s1 = json.loads((out1 / "summary.json").read_text())
    assert s1["problem"] == "quadratic"
    assert s1["final_grad_dual_norm"] <= 1e-2

    # explicit flag beats the file
    out2 = tmp_path / "flag_wins"
    assert _run("run", "--config", str(cfg), "--tol", "1e-10",
                "--out", str(out2)) == 0
    s2 = json.loads((out2 / "summary.json").read_text())
    assert s2["final_grad_dual_norm"] <= 1e-10
    assert s2["linear_solves"] > s1["linear_solves"]


def test_config_file_unknown_key_is_an_error(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("problem = quadratic\nshenanigans = 3\n")
    assert _run("run", "--config", str(cfg), "--out", str(tmp_path / "o")) == 1


def test_compare_table_and_csv(tmp_path):
    out = tmp_path / "cmp"
    code = _run("compare", "--problem", "membrane", "--n", "17",
                "--gamma", "1e2,1e3", "--solvers", "leapssn,plain",
                "--out", str(out))
    assert code == 0
    csv_lines = (out / "compare.csv").read_text().strip().splitlines()
    assert csv_lines[0].split(",")[0] == "gamma"
    assert len(csv_lines) == 3
    assert (out / "compare.txt").exists()


def test_compare_empty_sweep_fails(tmp_path):
    assert _run("compare", "--problem", "membrane", "--gamma", "",
                "--out", str(tmp_path / "c")) == 1


def test_verify_clean_problem(tmp_path):
    out = tmp_path / "v"
    code = _run("verify", "--problem", "partial_smooth", "--tol", "1e-10",
                "--out", str(out))
    assert code == 0
    report = json.loads((out / "report.json").read_text())
    assert report["violations"] == []
    assert report["manifold_index"] is not None
    assert report["audit"]["superlinear_detected"] is True


def test_verify_flags_broken_gradient(tmp_path):
    out = tmp_path / "vb"
    code = _run("verify", "--problem", "broken_gradient", "--out", str(out))
    assert code == 3
    report = json.loads((out / "report.json").read_text())
    assert report["violations"]
    kinds = {v[1] for v in report["violations"]}
    assert "grad_check" in kinds


def test_gen_data_svm(tmp_path):
    out = tmp_path / "d"
    code = _run("gen-data", "--problem", "svm", "--n", "3", "--seed", "9",
                "--out", str(out))
    assert code == 0
    files = list(out.glob("svm_l*_n3_s9.txt"))
    assert len(files) == 1
    X, y = read_svm_data(files[0])
    assert X.shape[1] == 3
    assert set(np.unique(y)) == {-1.0, 1.0}


def test_gen_data_tv(tmp_path):
    out = tmp_path / "d"
    code = _run("gen-data", "--problem", "tv", "--n", "16", "--seed", "4",
                "--out", str(out))
    assert code == 0
    img = read_pgm(out / "tv_n16_s4.pgm")
    assert img.data.shape == (16, 16)


def test_gen_data_rejects_problems_without_datasets(tmp_path):
    assert _run("gen-data", "--problem", "rosenbrock",
                "--out", str(tmp_path / "d")) == 1


def test_tv_run_writes_images(tmp_path):
    out = tmp_path / "tv"
    code = _run("run", "--problem", "tv", "--n", "16", "--gamma", "1e2",
                "--budget", "120", "--out", str(out))
    assert code == 0
    assert read_pgm(out / "restored.pgm").data.shape == (16, 16)
    assert read_pgm(out / "noisy.pgm").data.shape == (16, 16)


def test_usage_error_exits_one():
    with pytest.raises(SystemExit) as exc:
        main(["run", "--tol"])          # missing value
    assert exc.value.code == 1


@pytest.mark.skipif(shutil.which("leapssn") is None,
                    reason="console script not on PATH")
def test_console_script_smoke(tmp_path):
    proc = subprocess.run(
        ["leapssn", "run", "--problem", "quadratic", "--out",
         str(tmp_path / "o")],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "leapssn.cli", "run", "--problem",
         "quadratic", "--out", str(tmp_path / "o")],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
