import json
import math
import os
import subprocess

import numpy as np
import pytest

import expheat


def small_config(**data):
    cfg = {
        "problem": {"n": 1, "theta": 2.0, "r": 2.0, "L": 64.0, "N": 512},
        "data": {"kind": "gaussian_bump", "amplitude": 0.1, "width": 1.0},
        "time": {"T": 2.0},
    }
    cfg["data"].update(data)
    return cfg


def test_luxemburg_norm_scales():
    x = np.linspace(-8.0, 8.0, 256, endpoint=False)
    phi = np.exp(-x * x)
    a = expheat.luxemburg_norm(phi, 8.0, 2.0)
    b = expheat.luxemburg_norm(0.5 * phi, 8.0, 2.0)
    assert b == pytest.approx(0.5 * a, rel=1e-8)
    assert expheat.lp_norm(phi, 8.0, 1.0) == pytest.approx(math.sqrt(math.pi), rel=1e-12)


def test_generate_log_spike_is_capped():
    field, capped = expheat.generate(json.dumps(small_config(kind="log_spike")))
    assert field.shape == (512,)
    assert capped
    assert np.all(np.isfinite(field))


def test_solve_returns_decaying_norms():
    out = expheat.solve(json.dumps(small_config()))
    assert out["blowup_time"] is None
    linf = [row[out["qs"].index(math.inf)] for row in out["norms"]]
    assert linf[-1] < linf[0]
    assert all(b >= a for a, b in zip(out["mass"], out["mass"][1:]))


def test_exponents():
    assert expheat.exponent_selector(1.0, 8, 2.0, 2.0) == pytest.approx(4.0 / 3.0)
    assert expheat.theoretical_exponent(1, 2.0, 2.0, math.inf) == pytest.approx(0.25)
    t = [1.0, 2.0, 4.0, 8.0]
    slope, _, r2 = expheat.fit_power_law(t, [v ** -0.5 for v in t])
    assert slope == pytest.approx(-0.5)
    assert r2 == pytest.approx(1.0)
    value, terms, converged = expheat.series_majorant(0.1, 1.0)
    assert converged and terms > 0 and value > 0


def test_bad_config_raises():
    with pytest.raises(expheat.ConfigError):
        expheat.solve('{"problem": {"N": 100}, "data": {}}')


def test_cli_exit_codes(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps(small_config()))
    assert expheat.main(["solve", "--config", str(cfg), "--out-dir", str(tmp_path / "run")]) == expheat.EXIT_OK
    assert (tmp_path / "run" / "trajectory.csv").exists()
    assert expheat.main(["decay", str(tmp_path / "missing")]) == expheat.EXIT_MISSING_ARTIFACT
    cli = os.environ.get("EXPHEAT_CLI")
    if cli:
        proc = subprocess.run([cli, "orlicz-norm", "--config", str(cfg)], capture_output=True, text=True)
        assert proc.returncode == 0
        assert "luxemburg_norm" in proc.stdout
