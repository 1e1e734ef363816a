from __future__ import annotations

import csv
import subprocess
import sys

import pytest

from fracocp.cli import MANIFEST, OUT_ENV, main


def manifest(out):
    lines = (out / MANIFEST).read_text().splitlines()
    start = lines.index("files:")
    files = [ln.strip() for ln in lines[start + 1 :]]
    meta = {}
    for ln in lines[:start]:
        key, _, value = ln.partition(": ")
        meta[key] = value
    return meta, files


def assert_manifest_complete(out):
    _, files = manifest(out)
    assert sorted(files) == sorted(p.name for p in out.iterdir())
    assert files[-1] == MANIFEST


def test_approx_sweep_in_N(tmp_path):
    out = tmp_path / "o"
    assert main(["--out", str(out), "approx", "--fn", "t4", "--alpha", "0.5", "--n", "2", "--N", "2,4,6"]) == 0
    for N in (2, 4, 6):
        assert (out / f"approx_t4_0.5_2_{N}.csv").exists()
    rows = list(csv.DictReader((out / "summary_t4_0.5.csv").open()))
    errs = [float(r["max_abs_error"]) for r in rows]
    assert errs[0] > errs[1] > errs[2]
    assert_manifest_complete(out)


def test_approx_sweep_in_n(tmp_path):
    out = tmp_path / "o"
    assert main(["--out", str(out), "approx", "--fn", "exp2t", "--alpha", "0.5", "--N", "6", "--n", "1,2,3"]) == 0
    errs = [float(r["max_abs_error"]) for r in csv.DictReader((out / "summary_exp2t_0.5.csv").open())]
    assert errs[0] > errs[1] > errs[2]


def test_approx_caputo(tmp_path):
    out = tmp_path / "o"
    assert main(["--out", str(out), "approx", "--fn", "exp2t", "--alpha", "0.5", "--n", "3", "--N", "6", "--caputo"]) == 0
    errs = [float(r["max_abs_error"]) for r in csv.DictReader((out / "summary_exp2t_0.5.csv").open())]
    assert errs[0] < 0.1


@pytest.mark.parametrize(
    "args",
    [
        ["approx", "--fn", "t4", "--alpha", "1.0"],
        ["approx", "--fn", "t4", "--alpha", "0.5", "--n", "3", "--N", "2"],
        ["approx", "--fn", "sin", "--alpha", "0.5"],
        ["approx", "--fn", "t4", "--alpha", "0.5", "--N", "x"],
        ["approx", "--fn", "t4", "--alpha", "0.5", "--m", "1"],
        ["example2", "--bracket", "1.2,1.2"],
        ["example2", "--bracket", "1.0"],
        ["example1", "--alpha", "0"],
        ["nonsense"],
    ],
)
def test_invalid_input_exits_2(tmp_path, args, capsys):
    assert main(["--out", str(tmp_path / "o"), *args]) == 2


def test_output_path_is_a_file_exits_4(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["--out", str(blocker / "sub"), "approx", "--fn", "t4", "--alpha", "0.5"]) == 4


def test_env_var_sets_default_output(tmp_path, monkeypatch):
    monkeypatch.setenv(OUT_ENV, str(tmp_path / "env"))
    assert main(["approx", "--fn", "t4", "--alpha", "0.5", "--N", "2"]) == 0
    assert (tmp_path / "env" / MANIFEST).exists()


def test_example1_and_config_are_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["--out", str(a), "example1", "--N", "2,3"]) == 0
    meta, files = manifest(a)
    assert meta["converged"] == "yes"
    for pipe in ("frac", "reduced"):
        assert float(meta[f"metric E {pipe} N=3"]) < float(meta[f"metric E {pipe} N=2"])
    assert "example1_exact.csv" in files and "example1_summary.csv" in files
    assert_manifest_complete(a)
    cfg = tmp_path / "e1.yaml"
    cfg.write_text("preset: example1\nalpha: 0.5\nexpansion_N: 3\npipeline: both\n")
    assert main(["--out", str(b), "solve", str(cfg)]) == 0
    for pipe in ("frac", "reduced"):
        name = f"example1_{pipe}_N3.csv"
        assert (a / name).read_bytes() == (b / name).read_bytes()
    assert_manifest_complete(b)


def test_rerun_is_reproducible(tmp_path):
    args = ["approx", "--fn", "exp2t", "--alpha", "0.3", "--n", "2", "--N", "4"]
    assert main(["--out", str(tmp_path / "a"), *args]) == 0
    assert main(["--out", str(tmp_path / "b"), *args]) == 0
    for p in (tmp_path / "a").glob("*.csv"):
        assert p.read_bytes() == (tmp_path / "b" / p.name).read_bytes()


def test_solve_inactive_inequality(tmp_path):
    cfg = tmp_path / "q.yaml"
    cfg.write_text(
        "model: quadratic\nalpha: 0.5\nM: 1.0\nN: 0.0\nx_a: 1.0\n"
        "terminal:\n  type: fixed_T_inequality\n  T: 1.0\n  K: 0.5\npipeline: fractional-conditions\n"
    )
    out = tmp_path / "o"
    assert main(["--out", str(out), "solve", str(cfg)]) == 0
    meta, _ = manifest(out)
    ineq, product = (float(v) for v in meta["metric transversality frac"].split())
    assert abs(ineq) <= 1e-8 and abs(product) <= 1e-8
    rows = list(csv.DictReader((out / "quadratic_frac_N2.csv").open()))
    assert float(rows[-1]["x"]) > 0.5


def test_solve_config_error_exits_2(tmp_path, capsys):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("model: quadratic\nM: 0\nN: 0\nterminal: {type: fixed_T_free_x, T: 1}\n")
    assert main(["--out", str(tmp_path / "o"), "solve", str(cfg)]) == 2
    assert "line 2" in capsys.readouterr().err


def test_missing_config_file_exits_4(tmp_path):
    assert main(["--out", str(tmp_path / "o"), "solve", str(tmp_path / "missing.yaml")]) == 4


def test_console_entry_point(tmp_path):
    res = subprocess.run(
        [sys.executable, "-m", "fracocp.cli", "--out", str(tmp_path / "o"), "approx", "--fn", "t4", "--alpha", "0.5", "--N", "2"],
        capture_output=True, text=True,
    )
    assert res.returncode == 0, res.stderr


def test_version():
    assert main(["--version"]) == 0


@pytest.mark.xfail(
    strict=True,
    reason="the N=2 and N=3 approximations place the optimal horizon about 0.016 apart",
)
def test_example2_horizon_stable_in_N(tmp_path):
    out = tmp_path / "o"
    assert main(["--out", str(out), "example2", "--N", "2,3", "--pipeline", "fractional-conditions"]) == 0
    meta, _ = manifest(out)
    T2, T3 = float(meta["metric T frac N=2"]), float(meta["metric T frac N=3"])
    assert abs(T2 - T3) <= 1e-2
