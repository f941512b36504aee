import os
import re

import numpy as np
import pytest

from iontrap.cli import main, parse_range
from iontrap.config import ConfigError, RunConfig, parse_config_text


def _read(path):
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _rows(path):
    return [line for line in _read(path).splitlines() if line and not line.startswith("#")]


def _summary(path):
    return {k: float(v) for k, v in re.findall(r"^(\w+) = ([-0-9.eE+]+)$", _read(path), re.M)}


# Configuration


def test_config_defaults():
    cfg = RunConfig.from_mapping()
    p = cfg.params
    assert p.omega_sec == pytest.approx(2 * np.pi * 1.32e6)
    assert p.eta == pytest.approx(0.0616)
    assert p.Omega == pytest.approx(2 * np.pi * 125e3)
    assert p.Delta0 == pytest.approx(2 * np.pi * 500)
    assert cfg.shots is None and cfg.mode == "physical"
    assert cfg.noise.laser_linewidth_equiv == pytest.approx(2 * np.pi * 300)


def test_config_parse_errors():
    with pytest.raises(ConfigError):
        parse_config_text("trap.unknown = 3\n")
    with pytest.raises(ConfigError):
        parse_config_text("trap.eta = 0.1\ntrap.eta = 0.2\n")
    with pytest.raises(ConfigError):
        parse_config_text("just words\n")
    with pytest.raises(ConfigError):
        RunConfig.from_text("trap.eta = 2\n").params
    with pytest.raises(ConfigError):
        RunConfig.from_text("execution.mode = quantum\n").validate()


def test_config_roundtrip_and_digest():
    cfg = RunConfig.from_text("execution.seed = 7  # comment\nnoise.linewidth_hz = 0\n")
    again = RunConfig.from_text(cfg.to_text())
    assert again.digest == cfg.digest
    assert cfg.seed == 7
    assert cfg.digest != RunConfig.from_mapping().digest


def test_parse_range():
    assert len(parse_range("0.8:2.0:0.1")) == 13
    assert np.allclose(parse_range("1,2.5"), [1, 2.5])
    with pytest.raises(ValueError):
        parse_range("1:0:0.1")


# Exit codes


def test_bad_config_exits_nonzero(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("trap.eta = banana\n")
    assert main(["scan", "rabi", "--config", str(cfg), "--out", str(tmp_path)]) != 0
    err = capsys.readouterr().err
    assert err.startswith("iontrap: error:") and len(err.strip().splitlines()) == 1


def test_missing_config_exits_nonzero(tmp_path):
    assert main(["errorbudget", "--config", str(tmp_path / "none.cfg")]) != 0


def test_unknown_experiment_exits_nonzero():
    with pytest.raises(SystemExit) as exc:
        main(["scan", "spectroscopy"])
    assert exc.value.code != 0


# Commands


def test_dump_sequence(capsys):
    assert main(["dump-sequence", "--prep", "4", "--gate", "cnot", "--meas", "2"]) == 0
    out = capsys.readouterr().out
    lines = out.splitlines()
    assert lines[0].startswith("PULSE blue_sideband theta=3.14159")
    assert lines[1].startswith("PULSE carrier theta=3.14159")
    assert "MEASURE m1" in lines and "COND {" in lines and lines[-1] == "}"
    assert "np." not in out
    assert main(["dump-sequence"]) != 0


def test_scan_stark_row_count(tmp_path):
    assert main(["scan", "stark", "--detunings", "0.8:2.0:0.1", "--trajectories", "5", "--out", str(tmp_path)]) == 0
    path = tmp_path / "scan_stark.csv"
    rows = _rows(path)
    assert rows[0] == "detuning_over_omega_sec,abs_shift_hz,stderr_hz"
    assert len(rows) - 1 == 13
    text = _read(path)
    for key in ("# iontrap ", "# config_sha256 = ", "# seed = ", "# b_hz = "):
        assert key in text


def test_scan_ramsey_sideband(tmp_path):
    assert main(["scan", "ramsey", "--transition", "bsb", "--delays", "0:1.2e-3:1.5e-4",
                 "--trajectories", "200", "--out", str(tmp_path)]) == 0
    t2 = float(re.search(r"# T2 = ([0-9.eE+-]+)", _read(tmp_path / "scan_ramsey.csv")).group(1))
    assert 500e-6 <= t2 <= 750e-6


def test_scan_rabi_and_residual(tmp_path):
    assert main(["scan", "rabi", "--durations", "0:2e-4:1e-5", "--exact", "--trajectories", "5",
                 "--out", str(tmp_path)]) == 0
    assert main(["scan", "residual_stark", "--trajectories", "5", "--out", str(tmp_path)]) == 0
    assert "# offset_hz = " in _read(tmp_path / "scan_residual_stark.csv")


def test_tomography_idealized_identity(tmp_path):
    assert main(["tomography", "--gate", "identity", "--mode", "idealized", "--exact",
                 "--config", _zero_noise(tmp_path), "--out", str(tmp_path)]) == 0
    summary = _summary(tmp_path / "tomography_identity_chi.txt")
    assert summary["f_process"] == pytest.approx(1.0, abs=1e-6)
    ds = _rows(tmp_path / "tomography_identity_dataset.csv")
    assert ds[0] == "input_index,measurement_index,shots,successes" and len(ds) == 1 + 240


def _zero_noise(tmp_path):
    path = tmp_path / "quiet.cfg"
    path.write_text("noise.linewidth_hz = 0\nnoise.intensity_fast_pp = 0\nnoise.intensity_slow_pp = 0\n")
    return str(path)


def test_tomography_series_with_shots(tmp_path):
    assert main(["tomography", "--gate", "series", "--mode", "idealized", "--shots", "500", "--bootstrap", "2",
                 "--trajectories", "10", "--out", str(tmp_path)]) == 0
    text = _read(tmp_path / "tomography_summary.csv")
    assert "# fit F_n = F_i F_g^n" in text
    assert len(_rows(tmp_path / "tomography_summary.csv")) == 4


def test_errorbudget_zero_noise(tmp_path):
    assert main(["errorbudget", "--config", _zero_noise(tmp_path), "--trajectories", "50",
                 "--out", str(tmp_path)]) == 0
    rows = dict(line.split(",")[:2] for line in _rows(tmp_path / "errorbudget.csv")[1:])
    assert float(rows["laser_freq"]) < 1e-3 and float(rows["laser_intensity"]) < 1e-3
    assert float(rows["off_resonant"]) > 0.01
    assert "product rule" in _read(tmp_path / "errorbudget.txt")


# Determinism


def _tree(d):
    return {name: _read(os.path.join(d, name)) for name in sorted(os.listdir(d))}


def test_same_seed_identical_files(tmp_path):
    args = ["scan", "ramsey", "--delays", "0:6e-4:2e-4", "--trajectories", "20", "--seed", "4"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    assert _tree(tmp_path / "a") == _tree(tmp_path / "b")


def test_worker_count_independence(tmp_path):
    args = ["tomography", "--gate", "cnot", "--mode", "idealized", "--trajectories", "4", "--shots", "200",
            "--bootstrap", "2", "--seed", "9"]
    assert main(args + ["--workers", "1", "--out", str(tmp_path / "w1")]) == 0
    assert main(args + ["--workers", "2", "--out", str(tmp_path / "w2")]) == 0
    assert _tree(tmp_path / "w1") == _tree(tmp_path / "w2")
