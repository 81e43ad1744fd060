"""End-to-end command-line checks in temporary directories."""

import json
import hashlib
from pathlib import Path

import numpy as np
import pytest

from primeflow.artifacts import load_cf
from primeflow.cli import main
from primeflow.config import RunConfig
from primeflow.pipeline import run_all
from primeflow.primes import load_primes_bin, sieve


@pytest.fixture()
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


def _build_cf(workdir) -> Path:
    out = workdir / "cf.json"
    assert main([
        "alpha", "build", "--c0", "1", "--delta", "0.5",
        "--bits", "00000", "--levels", "5", "--out", str(out),
    ]) == 0
    return out


def test_alpha_build_and_verify(workdir, capsys):
    path = _build_cf(workdir)
    cf, params = load_cf(path)
    assert cf.denominators == (1, 1, 2, 3, 5, 13, 733)
    assert params.delta == 0.5
    assert main(["alpha", "verify", "--in", str(path)]) == 0
    out = capsys.readouterr().out
    assert "all checks passed" in out


def test_orbit_json_output(workdir, capsys):
    path = _build_cf(workdir)
    capsys.readouterr()  # drop the build log
    assert main(["orbit", "--cf", str(path), "--x", "1/3", "--n", "3", "--tol", "0.25"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["point"] == "1/3"
    assert data["budget"]["steps"] == 3


def test_sums_lemma4_roundtrip(workdir):
    path = _build_cf(workdir)
    out = workdir / "lemma4.csv"
    code = main([
        "sums", "lemma4", "--cf", str(path), "--kmax", "10",
        "--levels", "3..4", "--grid", "16", "--out", str(out), "--no-plots",
    ])
    assert code == 0
    rows = out.read_text().strip().splitlines()
    assert rows[0].startswith("level,k,")
    assert len(rows) == 1 + 20 * 2
    assert all(row.split(",")[7] == "true" for row in rows[1:])


def test_sums_deviation_and_fit(workdir):
    path = _build_cf(workdir)
    out = workdir / "dev.csv"
    assert main([
        "sums", "deviation", "--cf", str(path), "--levels", "2..5",
        "--grid", "32", "--out", str(out), "--no-plots",
    ]) == 0
    assert len(out.read_text().strip().splitlines()) == 5


def test_flow_t_json(workdir, capsys):
    path = _build_cf(workdir)
    capsys.readouterr()  # drop the build log
    assert main([
        "flow", "t", "--cf", str(path), "--x", "1/10", "--s", "0.3", "--t", "2.5",
    ]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["steps"] >= 1
    assert 0 <= data["height"]


def test_primes_sieve_binary(workdir):
    out = workdir / "primes.bin"
    assert main(["primes", "sieve", "--limit", "10000", "--out", str(out)]) == 0
    loaded = load_primes_bin(out, limit=10000)
    assert np.array_equal(loaded.primes, sieve(10000).primes)


def test_primes_sw_output(workdir, capsys):
    assert main(["primes", "sw", "--x", "1e5", "--q", "5"]) == 0
    out = capsys.readouterr().out
    assert "pi(100000) = 9592" in out
    assert out.count("\n") >= 6


def test_equi_run_writes_report(workdir):
    path = _build_cf(workdir)
    report = workdir / "report.json"
    csv = workdir / "report.csv"
    assert main([
        "equi", "run", "--cf", str(path), "--d", "0.3", "--levels", "3..5",
        "--max-horizon", "1e4", "--out", str(report), "--csv", str(csv), "--no-plots",
    ]) == 0
    data = json.loads(report.read_text())
    assert [lvl["level"] for lvl in data["levels"]] == [3, 4, 5]
    assert csv.exists()


def test_flow_near_return_csv(workdir):
    path = _build_cf(workdir)
    out = workdir / "nr.csv"
    assert main([
        "flow", "near-return", "--cf", str(path), "--level", "4",
        "--kmax", "4", "--out", str(out), "--no-plots",
    ]) == 0
    rows = out.read_text().strip().splitlines()
    assert len(rows) == 6  # header + K = 0..4


def test_run_all_default_exit_zero(workdir):
    # budget knocked down to keep the integration run quick
    cfg_text = "out_dir = out\nkmax = 25\nx_grid = 16\nmax_horizon = 1000\n"
    cfg_file = workdir / "run.cfg"
    cfg_file.write_text(cfg_text)
    assert main(["run-all", "--config", str(cfg_file)]) == 0
    out = workdir / "out"
    for name in (
        "cf.json", "roof.json", "lemma4.csv", "deviation.csv", "uniform.csv",
        "near_return.csv", "report.json", "report.csv",
        "fig_lemma4.png", "fig_deviation.png", "fig_near_return.png",
        "fig_experiment.png", "fig_orbit.png",
    ):
        assert (out / name).exists(), name
    assert not (out / "failures.json").exists()


def test_run_all_check_only(workdir):
    cfg_file = workdir / "run.cfg"
    cfg_file.write_text("out_dir = lean\nkmax = 10\nx_grid = 8\ncheck_only = true\nemit_plots = false\n")
    assert main(["run-all", "--config", str(cfg_file)]) == 0
    out = workdir / "lean"
    assert (out / "lemma4.csv").exists()
    assert not (out / "report.json").exists()
    assert not (out / "fig_lemma4.png").exists()


def test_run_all_budget_failure_manifest(workdir):
    cfg_file = workdir / "run.cfg"
    cfg_file.write_text(
        "out_dir = broken\nkmax = 10\nx_grid = 8\ncheck_only = true\n"
        "emit_plots = false\nstep_budget = 1\n"
    )
    code = main(["run-all", "--config", str(cfg_file)])
    assert code != 0


def test_error_paths_return_nonzero(workdir, capsys):
    assert main(["alpha", "build", "--delta", "0.5", "--levels", "6",
                 "--bits", "000000", "--out", str(workdir / "x.json")]) == 2
    err = capsys.readouterr().err
    assert "BudgetExhaustedError" in err
