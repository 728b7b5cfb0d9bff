import csv
import os
import subprocess
import sys

import numpy as np
import pytest

from weylsonine.cli import ConfigError, load_config, main, write_csv


def run(tmp_path, command, config, *extra):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(config)
    out = tmp_path / "out.csv"
    code = main([command, "--config", str(cfg), "--out", str(out), *extra])
    return code, out


def read(out):
    lines = out.read_text().splitlines()
    meta = [l for l in lines if l.startswith("#")]
    rows = list(csv.reader(l for l in lines if not l.startswith("#")))
    return meta, rows[0], rows[1:]


def test_kernel_check_pass(tmp_path):
    code, out = run(tmp_path, "kernel-check", "kernel = power-law\nalpha = 0.5\n")
    assert code == 0
    meta, cols, rows = read(out)
    assert cols == ["t", "convolution_value", "target", "error"]
    assert any("result = pass" in m for m in meta)
    assert len(rows) == 3


def test_kernel_check_mismatched_pair_fails(tmp_path):
    code, _ = run(tmp_path, "kernel-check", "kernel = power-law\nalpha = 0.5\nkappa_alpha = 0.3\n")
    assert code == 1


def test_seventeen_significant_digits(tmp_path):
    code, out = run(tmp_path, "kernel-check", "kernel = power-law\nalpha = 0.5\ncheck_points = 1.0\n")
    _, _, rows = read(out)
    mantissa = rows[0][1].lower().split("e")[0].replace("-", "").replace(".", "").lstrip("0")
    assert len(mantissa) == 17


@pytest.mark.parametrize(
    "config",
    [
        "kernel = hilfer\n",
        "kernel = power-law\nalpha = 1.5\n",
        "kernel = power-law\nalpha = half\n",
        "scale = cubic\n",
        "this line has no equals sign\n",
    ],
)
def test_config_errors_exit_2(tmp_path, config):
    code, out = run(tmp_path, "apply", config)
    assert code == 2
    assert not out.exists()


def test_missing_config_file_exits_2(tmp_path):
    assert main(["apply", "--config", str(tmp_path / "absent.cfg")]) == 2


def test_bad_flag_exits_2():
    assert main(["apply", "--form", "sideways"]) == 2


def test_apply_all_forms(tmp_path):
    cfg = "kernel = power-law\nalpha = 0.5\nt_min = -20\nt_max = 20\nt_step = 0.01\n"
    code, out = run(tmp_path, "apply", cfg, "--form", "all", "--tol", "1e-4")
    assert code == 0
    meta, cols, rows = read(out)
    assert cols[:3] == ["t", "re_u", "im_u"]
    assert "re_marchaud" in cols and "re_direct" in cols
    assert any(m.startswith("# max_diff direct-spectral") for m in meta)


def test_apply_tolerance_failure_exits_1(tmp_path):
    cfg = "kernel = power-law\nalpha = 0.5\nt_min = -20\nt_max = 20\nt_step = 0.01\n"
    code, _ = run(tmp_path, "apply", cfg, "--form", "all", "--tol", "1e-12")
    assert code == 1


def test_marchaud_without_levy_is_numerical_failure(tmp_path):
    code, _ = run(tmp_path, "apply", "kernel = caputo-fabrizio\n", "--form", "marchaud")
    assert code == 1


def test_solve_manufactured(tmp_path):
    cfg = "kernel = caputo-fabrizio\nalpha = 0.5\nlambda = 1\nmanufactured = true\nweight = exponential\nweight_rate = 0.25\n"
    code, out = run(tmp_path, "solve", cfg)
    assert code == 0
    meta, cols, rows = read(out)
    assert cols == ["t", "f", "re_u", "im_u"]
    res = float(next(m for m in meta if m.startswith("# residual")).split("=")[1])
    assert res < 1e-6


def test_solve_non_elliptic_exits_1(tmp_path):
    code, _ = run(tmp_path, "solve", "kernel = bessel-klein-gordon\nlambda = 1\n")
    assert code == 1


def test_dispersion(tmp_path):
    code, out = run(tmp_path, "dispersion", "gamma = 3.141592653589793\nlambda = 1\ncount = 3\n")
    assert code == 0
    _, cols, rows = read(out)
    np.testing.assert_allclose([float(r[1]) for r in rows], [1.0, 1 / 3, 1 / 5], rtol=1e-13)
    code, out = run(tmp_path, "dispersion", "lambda = 2\n")
    assert code == 0
    meta, _, rows = read(out)
    assert rows == [] and any("no real roots" in m for m in meta)


def test_figures(tmp_path):
    cfg = tmp_path / "f.cfg"
    cfg.write_text("alpha = 0.5\n")
    assert main(["figures", "--config", str(cfg), "--out", str(tmp_path / "figs")]) == 0
    _, cols, rows = read(tmp_path / "figs" / "fig1_kernels.csv")
    at_one = next(r for r in rows if float(r[0]) == 1.0)
    assert float(at_one[1]) == pytest.approx(0.56418958354775628, rel=1e-15)
    assert (tmp_path / "figs" / "fig3_redshift.csv").exists()


def test_write_csv_is_atomic(tmp_path):
    path = tmp_path / "x.csv"
    path.write_text("old")

    def rows():
        yield (1.0, 2.0)
        raise RuntimeError("boom")

    with pytest.raises(RuntimeError):
        write_csv(str(path), ["meta"], ["a", "b"], rows())
    assert path.read_text() == "old"
    assert [p.name for p in tmp_path.iterdir()] == ["x.csv"]


def test_load_config_comments_and_case(tmp_path):
    p = tmp_path / "c.cfg"
    p.write_text("# comment\nKernel = power-law  ; trailing\nalpha=0.25\n")
    cfg = load_config(str(p))
    assert cfg.get("kernel") == "power-law"
    assert cfg.number("alpha", 0.5) == 0.25
    with pytest.raises(ConfigError):
        cfg.number("kernel", 1.0)


def test_console_entry_point(tmp_path):
    cfg = tmp_path / "d.cfg"
    cfg.write_text("lambda = 2\n")
    proc = subprocess.run(
        [sys.executable, "-m", "weylsonine.cli", "dispersion", "--config", str(cfg)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout.startswith("# weylsonine")
