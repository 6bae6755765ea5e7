import csv
import json
import subprocess
import sys

import pytest

from bloch_rephase.cli import main
from bloch_rephase.seqfile import shipped_example

SEQ = str(shipped_example())


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
    assert "phase-scan" in capsys.readouterr().out
    assert main(["simulate", "--help"]) == 0


def test_unknown_command_is_usage_error():
    assert main(["bogus"]) == 2


def test_missing_sequence_file(tmp_out, capsys):
    assert main(["simulate", "--seq", "nowhere.seq", "--out", str(tmp_out)]) == 2
    assert "nowhere.seq" in capsys.readouterr().err


def test_missing_config_file(capsys):
    assert main(["simulate", "--config", "no_such_config.json"]) == 2
    assert "no_such_config.json" in capsys.readouterr().err


def test_bad_tolerance(tmp_out):
    assert main(["simulate", "--seq", SEQ, "--tol", "1e-3", "--out", str(tmp_out)]) == 2


def test_unknown_config_key(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"sequence": SEQ, "colour": "red"}))
    assert main(["simulate", "--config", str(cfg)]) == 2


def test_syntax_error_reports_position(tmp_path, capsys):
    bad = tmp_path / "bad.seq"
    bad.write_text("delay 10 us\npulse wobble center=1\n")
    assert main(["parse-check", "--seq", str(bad)]) == 2
    assert "line 2" in capsys.readouterr().err


def test_identity_demo(tmp_out, capsys):
    assert main(["simulate", "--config", "identity_demo.json", "--out", str(tmp_out), "--classes", "21"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("simulate: 21 classes")
    summary = json.loads((tmp_out / "simulate.json").read_text())
    assert summary["mean_angle_from_initial_deg"] <= 2.0
    finals = rows(tmp_out / "finals.csv")
    assert finals[0] == ["class_index", "detuning_mhz", "weight", "u", "v", "w", "angle_from_initial_deg"]
    assert len(finals) == 22
    assert rows(tmp_out / "trajectory.csv")[0] == ["t_us", "u", "v", "w"]


def test_lab_demo_prints_comparison(tmp_out, capsys):
    assert main(["simulate", "--config", "lab_demo.json", "--out", str(tmp_out), "--classes", "3"]) == 0
    out = capsys.readouterr().out
    assert "w_rwa" in out and "rotating-wave vs full-field" in out
    table = rows(tmp_out / "rwa_comparison.csv")
    assert len(table) == 4
    assert max(float(r[-1]) for r in table[1:]) <= 5.0


def test_lab_frame_refuses_relaxation(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"sequence": "scaled_echo.seq", "frame": "lab", "relaxation": {"T2_us": 100}}))
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2


def test_characterize_flags_bad_edges_but_succeeds(tmp_path, capsys):
    seq = tmp_path / "short.seq"
    seq.write_text("reference 10\npulse chirp center=10 span=0.5 duration=20 rabi=200\n")
    out = tmp_path / "o"
    assert main(["characterize", "--seq", str(seq), "--out", str(out)]) == 0
    assert "WARNING" in capsys.readouterr().out
    report = json.loads((out / "characterize.json").read_text())
    assert report["warnings"] is True
    assert rows(out / "zeta_pulse0.csv")[0] == ["t_us", "zeta", "theta_rad"]


def test_characterize_reference(tmp_out, capsys):
    assert main(["characterize", "--seq", SEQ, "--out", str(tmp_out)]) == 0
    report = json.loads((tmp_out / "characterize.json").read_text())
    assert report["warnings"] is False
    assert len(report["pulses"]) == 2
    assert len(rows(tmp_out / "zeta_pulse1.csv")) == 4097


def test_phase_scan_rows(tmp_out):
    assert main(["phase-scan", "--seq", SEQ, "--out", str(tmp_out), "--classes", "9", "--tol", "1e-8"]) == 0
    table = rows(tmp_out / "phase_scan.csv")
    assert table[0] == ["scan_value_rad", "I_i_arb", "I_f_arb", "ratio", "alpha_hat_rad"]
    assert len(table) == 18
    side = json.loads((tmp_out / "phase_scan.json").read_text())
    assert side["n_points"] == 17 and "alpha_hat_rad" in side


def test_tau_scan_rows(tmp_out):
    assert main(["tau-scan", "--seq", SEQ, "--out", str(tmp_out), "--classes", "9", "--tol", "1e-8"]) == 0
    table = rows(tmp_out / "tau_scan.csv")
    assert table[0][0] == "scan_value_us" and len(table) == 5
    assert "relative_spread" in json.loads((tmp_out / "tau_scan.json").read_text())


def test_tau_scan_needs_two_passages(tmp_path):
    seq = tmp_path / "one.seq"
    seq.write_text("pulse chirp center=14 span=4 duration=100 rabi=141\n")
    assert main(["tau-scan", "--seq", str(seq), "--out", str(tmp_path / "o")]) == 2


def test_compare_errors(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"errors": {"delta_over_rabi": [0.02, 0.05], "random_sets": 1}}))
    out = tmp_path / "o"
    assert main(["compare-errors", "--config", str(cfg), "--out", str(out)]) == 0
    table = rows(out / "errors.csv")
    assert table[0] == [
        "delta_rad_per_us",
        "tau_us",
        "eps_pi_rad",
        "eps_pi_measured_rad",
        "eps_2pi_rad",
        "eps_2pi_measured_rad",
        "eps_arp_rad",
        "eps_arp_measured_rad",
    ]
    assert len(table) == 3
    summary = json.loads((out / "errors.json").read_text())
    assert set(summary["slopes_measured"]) == {"eps_pi", "eps_2pi", "eps_arp"}


def test_compare_errors_rejects_unknown_key(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"errors": {"gain": 2}}))
    assert main(["compare-errors", "--config", str(cfg), "--out", str(tmp_path)]) == 2


def test_parse_check(capsys):
    assert main(["parse-check", "--seq", SEQ, "--classes", "5"]) == 0
    out = capsys.readouterr().out
    assert "5 elements, 2 pulses, 240 us" in out
    assert "z-rotation True" in out


@pytest.mark.parametrize("command", ["simulate", "phase-scan"])
def test_outputs_are_byte_identical(tmp_path, command):
    args = [command, "--seq", SEQ, "--classes", "7", "--tol", "1e-8", "--seed", "3"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    for f in sorted((tmp_path / "a").glob("*.csv")):
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "bloch_rephase", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "compare-errors" in res.stdout
