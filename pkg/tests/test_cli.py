"""Command-line interface: artifact schemas, reproducibility, and error
handling."""

import json
import os

import pytest

from bilinctrl.cli import main, read_csv, read_json

FAST = {
    "spectrum": ["--N", "8"],
    "gaps": ["--K", "10"],
    "resonance": ["--l", "1", "--K", "50"],
    "coeffs": ["--K", "10"],
    "bound-check": ["--K", "10"],
    "obstruction-scan": ["--model", "neumann", "--preset", "neumann_example",
                         "--K", "50"],
    "simulate": ["--N", "8", "--n-steps", "128", "--T", "0.1"],
    "steer": ["--N", "10", "--K", "10", "--n-steps", "512", "--T", "0.4"],
    "derivative-check": ["--N", "16", "--n-steps", "256", "--T", "0.3"],
    "hermite-check": ["--kmax", "5"],
}

ARTIFACTS = {
    "spectrum": ["spectrum.csv"],
    "gaps": ["gaps.json"],
    "resonance": ["resonance.json"],
    "coeffs": ["coefficients.csv"],
    "bound-check": ["bound_check.json"],
    "obstruction-scan": ["obstruction.csv"],
    "simulate": ["trajectory.csv", "norms.csv"],
    "steer": ["steering.json"],
    "derivative-check": ["derivative_check.json"],
    "hermite-check": ["hermite_identity.csv", "hermite_bound.csv"],
}


def _run(args):
    return main(args)


@pytest.mark.parametrize("verb", sorted(FAST))
def test_verb_writes_artifacts(verb, tmp_path):
    out = str(tmp_path / "out")
    assert _run([verb, *FAST[verb], "-o", out]) == 0
    for name in ARTIFACTS[verb]:
        assert (tmp_path / "out" / name).exists()


def test_moments_solve_from_config(tmp_path):
    cfg = {
        "task": {
            "T": 1.0,
            "frequencies": [0.0, 3.0, 8.0],
            "targets_re": [0.5, 0.1, -0.2],
            "targets_im": [0.0, 0.2, 0.3],
        },
        "output_dir": str(tmp_path),
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    assert _run(["moments-solve", "--config", str(path)]) == 0
    doc = read_json(str(tmp_path / "moments.json"))
    assert doc["residual_max"] < 1e-8
    assert "config_hash" in doc


def test_rerun_is_byte_identical(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    for out in (a, b):
        assert _run(["coeffs", "--K", "12", "--seed", "3",
                     "-o", str(out)]) == 0
    assert (a / "coefficients.csv").read_bytes() == \
        (b / "coefficients.csv").read_bytes()


def test_steer_rerun_is_byte_identical(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    for out in (a, b):
        assert _run(["steer", *FAST["steer"], "--seed", "4",
                     "-o", str(out)]) == 0
    assert (a / "steering.json").read_bytes() == \
        (b / "steering.json").read_bytes()


def test_csv_headers_and_hash_stamp(tmp_path):
    out = str(tmp_path)
    assert _run(["coeffs", "--K", "8", "-o", out]) == 0
    config_hash, header, rows = read_csv(str(tmp_path / "coefficients.csv"))
    assert header == ["k", "re", "im", "abs", "weighted_abs"]
    assert len(config_hash) == 16
    assert len(rows) == 8

    assert _run(["simulate", *FAST["simulate"], "-o", out]) == 0
    _, header, _ = read_csv(str(tmp_path / "trajectory.csv"))
    assert header == ["t", "k", "re", "im"]
    _, header, _ = read_csv(str(tmp_path / "norms.csv"))
    assert header == ["t", "l2", "h1"]


def test_hash_changes_with_configuration(tmp_path):
    out = str(tmp_path)
    assert _run(["spectrum", "--N", "8", "-o", out]) == 0
    first, _, _ = read_csv(str(tmp_path / "spectrum.csv"))
    assert _run(["spectrum", "--N", "9", "-o", out]) == 0
    second, _, _ = read_csv(str(tmp_path / "spectrum.csv"))
    assert first != second


def test_resonant_mode_reports_violations_with_exit_zero(tmp_path):
    out = str(tmp_path)
    assert _run(["resonance", "--l", "5", "--K", "200", "-o", out]) == 0
    doc = read_json(str(tmp_path / "resonance.json"))
    assert not doc["ok"]
    assert [7, 1] in doc["violations"]


def test_unknown_config_key_is_rejected(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"numerics": {"N": 8, "bogus": 1}}))
    assert _run(["spectrum", "--config", str(path),
                 "-o", str(tmp_path)]) == 1


def test_malformed_json_is_rejected(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text("{not json")
    assert _run(["spectrum", "--config", str(path),
                 "-o", str(tmp_path)]) == 1
    assert "error:" in capsys.readouterr().err


def test_invalid_model_error_exits_one(tmp_path, capsys):
    # Dirichlet has no mode 0
    assert _run(["spectrum", "--l", "0", "--N", "4", "--K", "4",
                 "-o", str(tmp_path)]) == 0  # spectrum ignores l
    assert _run(["coeffs", "--l", "0", "--K", "4",
                 "-o", str(tmp_path)]) == 1
    assert "error:" in capsys.readouterr().err


def test_env_var_sets_output_dir(tmp_path, monkeypatch):
    target = tmp_path / "from_env"
    monkeypatch.setenv("BILINCTRL_OUT", str(target))
    assert _run(["spectrum", "--N", "4"]) == 0
    assert (target / "spectrum.csv").exists()


def test_flag_beats_env_var(tmp_path, monkeypatch):
    env_dir = tmp_path / "env"
    flag_dir = tmp_path / "flag"
    monkeypatch.setenv("BILINCTRL_OUT", str(env_dir))
    assert _run(["spectrum", "--N", "4", "-o", str(flag_dir)]) == 0
    assert (flag_dir / "spectrum.csv").exists()
    assert not env_dir.exists()


def test_config_file_output_dir_respected(tmp_path):
    out = tmp_path / "cfg_out"
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"output_dir": str(out),
                                "numerics": {"N": 4}}))
    assert _run(["spectrum", "--config", str(path)]) == 0
    assert (out / "spectrum.csv").exists()
