import json
import os
import subprocess
import sys

import numpy as np
import pytest

from qmemsim import config
from qmemsim.device import DeviceParams
from qmemsim.errors import ConfigError

CLI = [sys.executable, "-m", "qmemsim.cli"]


def run_cli(*args, cwd=None):
    return subprocess.run(CLI + list(args), capture_output=True, text=True,
                          cwd=cwd)


@pytest.fixture()
def sample_cfg(tmp_path):
    path = tmp_path / "sample.cfg"
    config.write_sample_config(path)
    return str(path)


def test_parse_sample_config():
    device_kw, run_kw = config.parse_config_text(config.SAMPLE_CONFIG)
    p = DeviceParams(**device_kw)
    assert p.omega_s == pytest.approx(8.707546)
    assert p.kappa_s == pytest.approx(24.7)
    assert p.t1_q == pytest.approx(1.32)
    assert run_kw == {}


def test_parse_unit_conversions():
    device_kw, run_kw = config.parse_config_text(
        "omega_q = 6234 MHz\nkappa_s = 0.0247 MHz\nt1_q = 1320 ns\n"
        "dt_pulse = 0.1 ns\nframe = bare\nn_storage = 4\n")
    assert device_kw["omega_q"] == pytest.approx(6.234)
    assert device_kw["kappa_s"] == pytest.approx(24.7)
    assert device_kw["t1_q"] == pytest.approx(1.32)
    assert run_kw["dt_pulse"] == pytest.approx(1e-4)
    assert run_kw["frame"] == "bare"


def test_parse_rejects_unitless_frequency():
    with pytest.raises(ConfigError):
        config.parse_config_text("omega_q = 6.234\n")
    with pytest.raises(ConfigError):
        config.parse_config_text("t1_q = 1.32\n")


def test_parse_rejects_unknown_key_and_unit():
    with pytest.raises(ConfigError):
        config.parse_config_text("bogus = 1 GHz\n")
    with pytest.raises(ConfigError):
        config.parse_config_text("omega_q = 6.234 THz\n")
    with pytest.raises(ConfigError):
        config.parse_config_text("q0_ro = 1.9e6 GHz\n")


def test_config_render_round_trip():
    p = DeviceParams(omega_q=6.1, chi_s=0.9)
    text = config.device_params_to_config(p)
    device_kw, _ = config.parse_config_text(text)
    assert DeviceParams(**device_kw) == p


def test_validate_accepts_sample(sample_cfg):
    res = run_cli("validate", "--config", sample_cfg)
    assert res.returncode == 0
    assert "8.707546" in res.stdout
    assert "rad/us" in res.stdout


def test_validate_rejects_t2_bound(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("t1_q = 1.0 us\nt2_q = 3.0 us\n")
    res = run_cli("validate", "--config", str(path))
    assert res.returncode == 1
    assert "t2" in res.stderr.lower()


def test_validate_rejects_bad_step_for_bare_frame(tmp_path):
    path = tmp_path / "bare.cfg"
    path.write_text("frame = bare\ndt_pulse = 1 ns\n")
    res = run_cli("validate", "--config", str(path))
    assert res.returncode == 1
    assert "dt" in res.stderr


def test_run_requires_existing_config(tmp_path):
    out = tmp_path / "out"
    res = run_cli("run", "--config", str(tmp_path / "missing.cfg"),
                  "--experiment", "ringdown", "--out", str(out))
    assert res.returncode == 2
    assert not out.exists()


def test_run_rejects_unknown_experiment(sample_cfg):
    res = run_cli("run", "--config", sample_cfg, "--experiment", "nonsense")
    assert res.returncode == 2


def test_fit_experiment_and_determinism(tmp_path, sample_cfg):
    xs = np.linspace(0.0, 20.0, 30)
    ys = 0.8 * np.exp(-xs / 6.44) + 0.05
    data = tmp_path / "data.csv"
    with open(data, "w") as f:
        f.write("x,y\n")
        for x, y in zip(xs, ys):
            f.write(f"{x:.17g},{y:.17g}\n")

    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    for out in (out1, out2):
        res = run_cli("run", "--config", sample_cfg, "--experiment", "fit",
                      "--fit-model", "exponential", "--input", str(data),
                      "--out", str(out))
        assert res.returncode == 0, res.stderr
    fits = json.loads((out1 / "fits.json").read_text())
    assert fits["exponential"]["params"]["T"] == pytest.approx(6.44, rel=1e-6)
    assert (out1 / "results.csv").read_bytes() == (out2 / "results.csv").read_bytes()


def test_manifest_round_trip(tmp_path, sample_cfg):
    xs = np.linspace(0.0, 10.0, 20)
    data = tmp_path / "d.csv"
    with open(data, "w") as f:
        f.write("x,y\n")
        for x in xs:
            f.write(f"{x:.17g},{np.exp(-x / 3.0):.17g}\n")
    out1 = tmp_path / "first"
    res = run_cli("run", "--config", sample_cfg, "--experiment", "fit",
                  "--fit-model", "exponential", "--input", str(data),
                  "--out", str(out1))
    assert res.returncode == 0, res.stderr
    out2 = tmp_path / "replay"
    res = run_cli("run", "--from-manifest", str(out1 / "manifest.json"),
                  "--out", str(out2))
    assert res.returncode == 0, res.stderr
    assert (out1 / "results.csv").read_bytes() == (out2 / "results.csv").read_bytes()
    assert (out1 / "fits.json").read_bytes() == (out2 / "fits.json").read_bytes()


def test_ringdown_cli_reproduces_decay_time(tmp_path, sample_cfg):
    out = tmp_path / "ring"
    res = run_cli("run", "--config", sample_cfg, "--experiment", "ringdown",
                  "--mode", "readout", "--out", str(out))
    assert res.returncode == 0, res.stderr
    fits = json.loads((out / "fits.json").read_text())
    t_amp = fits["amplitude_decay"]["params"]["T"]
    assert t_amp * 1e3 == pytest.approx(79.58, rel=0.02)
    rows = (out / "results.csv").read_text().splitlines()
    assert rows[0] == "t_us,field_amplitude,uncertainty,n"
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["experiment"] == "ringdown"
    assert manifest["run"]["dims"] == [3, 5, 2]


def test_memory_protocol_sweep_cli(tmp_path, sample_cfg):
    out = tmp_path / "sweep"
    res = run_cli("run", "--config", sample_cfg, "--experiment",
                  "memory-protocol", "--sweep", "prep_angle=0:3.1415926:3",
                  "--out", str(out))
    assert res.returncode == 0, res.stderr
    rows = (out / "results.csv").read_text().splitlines()
    assert len(rows) == 4
    first = float(rows[1].split(",")[1])
    last = float(rows[3].split(",")[1])
    assert first > 0.85 and last < 0.15


def test_init_config(tmp_path):
    path = tmp_path / "new.cfg"
    res = run_cli("init-config", str(path))
    assert res.returncode == 0
    assert "omega_s" in path.read_text()
