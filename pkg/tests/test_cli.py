"""Command-line interface: subcommands, artifacts, exit codes."""

import json
import math

import pytest

from mchwave.cli import (EXIT_DOMAIN, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE,
                         dispatch, parse_length)


def strip_timestamps(text: str) -> list[str]:
    return [l for l in text.splitlines()
            if not l.startswith("# timestamp") and '"timestamp"' not in l]


class TestParseLength:
    def test_plain_number(self):
        assert parse_length("3.5") == 3.5

    def test_pi_suffix(self):
        assert parse_length("6pi") == pytest.approx(6 * math.pi, rel=1e-15)
        assert parse_length("0.5pi") == pytest.approx(0.5 * math.pi, rel=1e-15)
        assert parse_length("pi") == pytest.approx(math.pi, rel=1e-15)
        assert parse_length("-2pi") == pytest.approx(-2 * math.pi, rel=1e-15)

    def test_garbage(self):
        with pytest.raises(ValueError):
            parse_length("6tau")


class TestWaveCommand:
    def test_valid_wave(self, tmp_path):
        code = dispatch(["wave", "--k", "0.5", "--L", "18.8495559", "--n", "256",
                         "--out-dir", str(tmp_path)])
        assert code == EXIT_OK
        payload = json.loads((tmp_path / "wave.json").read_text())
        assert payload["tool_version"]
        assert payload["wave"]["b"] == pytest.approx(-0.2559, rel=1e-3)
        assert payload["ode_residual"] < 1e-8
        assert payload["validity"]["all_ok"] is True
        profile_lines = (tmp_path / "wave_profile.csv").read_text().splitlines()
        assert profile_lines[0].startswith("# tool_version")
        header_idx = next(i for i, l in enumerate(profile_lines) if not l.startswith("#"))
        assert profile_lines[header_idx] == "x,value"
        assert len(profile_lines) - header_idx - 1 == 256

    def test_discriminant_failure_exit_code(self, tmp_path):
        code = dispatch(["wave", "--k", "0.9", "--L", "3.14159",
                         "--out-dir", str(tmp_path)])
        assert code == EXIT_DOMAIN

    def test_out_dir_created_when_missing(self, tmp_path):
        target = tmp_path / "fresh" / "nested"
        code = dispatch(["wave", "--k", "0.5", "--L", "6pi",
                         "--out-dir", str(target)])
        assert code == EXIT_OK
        assert (target / "wave.json").exists()

    def test_invalid_wave_reports_margins(self, tmp_path, capsys):
        # k = 0.8 at L = 8 pi exists but fails the phi - c < 0 inequality
        code = dispatch(["wave", "--k", "0.8", "--L", "8pi", "--out-dir", str(tmp_path)])
        assert code == EXIT_DOMAIN
        assert "ineq_ii" in capsys.readouterr().out

    def test_usage_error(self):
        assert dispatch(["wave", "--k", "0.5"]) == EXIT_USAGE
        assert dispatch(["nonsense"]) == EXIT_USAGE


class TestScanCommand:
    def test_small_scan(self, tmp_path):
        code = dispatch(["scan", "--k-min", "0.1", "--k-max", "0.3",
                         "--L-min", "4pi", "--L-max", "6pi",
                         "--nk", "3", "--nL", "3", "--out-dir", str(tmp_path)])
        assert code == EXIT_OK
        lines = (tmp_path / "scan.csv").read_text().splitlines()
        header_idx = next(i for i, l in enumerate(lines) if not l.startswith("#"))
        assert lines[header_idx] == "k,L,I,valid,dA_dk,dc_dk,dV_dk,dF_dk"
        rows = lines[header_idx + 1:]
        assert len(rows) == 9
        # 17-significant-digit round trip
        first_i = float(rows[0].split(",")[2])
        assert first_i < 0.0
        summary = json.loads((tmp_path / "scan_summary.json").read_text())
        assert summary["max_I"] < 0.0
        assert summary["count_invalid"] == 0

    def test_workers_do_not_change_output(self, tmp_path):
        args = ["scan", "--k-min", "0.1", "--k-max", "0.3", "--L-min", "4pi",
                "--L-max", "6pi", "--nk", "2", "--nL", "2"]
        d1, d2 = tmp_path / "w1", tmp_path / "w2"
        d1.mkdir(), d2.mkdir()
        assert dispatch(args + ["--workers", "1", "--out-dir", str(d1)]) == EXIT_OK
        assert dispatch(args + ["--workers", "2", "--out-dir", str(d2)]) == EXIT_OK
        a = strip_timestamps((d1 / "scan.csv").read_text())
        b = strip_timestamps((d2 / "scan.csv").read_text())
        a = [l for l in a if not l.startswith("# out_dir") and not l.startswith("# workers")]
        b = [l for l in b if not l.startswith("# out_dir") and not l.startswith("# workers")]
        assert a == b


class TestSpectrumCommand:
    def test_wave_spectrum(self, tmp_path):
        code = dispatch(["spectrum", "--k", "0.5", "--L", "6pi", "--n", "128",
                         "--out-dir", str(tmp_path)])
        assert code == EXIT_OK
        payload = json.loads((tmp_path / "spectrum.json").read_text())
        spec = payload["spectrum"]
        assert spec["n_neg"] == 1 and spec["z_dim"] == 1
        assert len(spec["eigenvalues"]) == 128
        assert spec["grid"] == {"L": pytest.approx(6 * math.pi), "n": 128}
        assert spec["tol"] > 0
        assert payload["restricted_spectrum"]["n_neg"] == 1
        assert payload["pairing"]["value"] > 0

    def test_constant_case_with_override(self, tmp_path):
        code = dispatch(["spectrum", "--k", "0", "--L", "2pi", "--n", "128",
                         "--allow-multi-kernel", "--out-dir", str(tmp_path)])
        assert code == EXIT_OK
        payload = json.loads((tmp_path / "spectrum.json").read_text())
        assert payload["spectrum"]["z_dim"] == 2
        assert payload["pairing"]["value"] == pytest.approx(-math.pi, abs=1e-8)

    def test_evolution_spectrum_dump(self, tmp_path):
        code = dispatch(["spectrum", "--k", "0", "--L", "2pi", "--n", "64",
                         "--allow-multi-kernel", "--evolution",
                         "--out-dir", str(tmp_path)])
        assert code == EXIT_OK
        payload = json.loads((tmp_path / "spectrum.json").read_text())
        ev = payload["evolution_spectrum"]
        assert len(ev["eigenvalues_re"]) == 63
        assert max(abs(v) for v in ev["eigenvalues_re"]) < 1e-8  # purely imaginary


class TestKreinCommand:
    def test_no_branch(self, tmp_path):
        code = dispatch(["krein", "--k", "0.5", "--L-min", "4pi", "--L-max", "12pi",
                         "--out-dir", str(tmp_path)])
        assert code == EXIT_OK
        payload = json.loads((tmp_path / "krein.json").read_text())
        assert payload["krein"]["classification"] == "indeterminate"


class TestEvolveAndOrbit:
    def test_evolve_artifacts(self, tmp_path):
        code = dispatch(["evolve", "--k", "0.5", "--L", "6pi", "--t-end", "2",
                         "--out-dir", str(tmp_path)])
        assert code == EXIT_OK
        summary = json.loads((tmp_path / "evolve_summary.json").read_text())
        assert summary["terminated"] == "completed"
        assert summary["max_propagation_error"] < 1e-8
        lines = (tmp_path / "evolve.csv").read_text().splitlines()
        header_idx = next(i for i, l in enumerate(lines) if not l.startswith("#"))
        assert lines[header_idx] == "t,rho,drift_E,drift_F,drift_V"

    def test_evolve_blowup_exit_code(self, tmp_path):
        code = dispatch(["evolve", "--k", "0.5", "--L", "6pi", "--t-end", "50",
                         "--dt", "1.0", "--out-dir", str(tmp_path)])
        assert code == EXIT_NUMERICAL

    def test_orbit_deterministic(self, tmp_path):
        args = ["orbit", "--k", "0.5", "--L", "6pi", "--delta", "1e-3",
                "--seed", "3", "--t-end", "2", "--out-dir", str(tmp_path)]
        assert dispatch(args) == EXIT_OK
        first = strip_timestamps((tmp_path / "orbit.csv").read_text())
        assert dispatch(args) == EXIT_OK
        second = strip_timestamps((tmp_path / "orbit.csv").read_text())
        assert first == second
        summary = json.loads((tmp_path / "orbit_summary.json").read_text())
        assert summary["sup_rho"] < 20 * 1e-3


class TestCheckCommand:
    def test_all_pass(self, tmp_path, capsys):
        assert dispatch(["check", "--out-dir", str(tmp_path)]) == EXIT_OK
        out = capsys.readouterr().out
        assert "FAIL" not in out
        assert out.count("PASS") == 9
