import json

import numpy as np
import pytest

import ultrafast_ion
from data_io import read_csv, write_csv
from estimation import FitResult
from ultrafast_ion import build_parser, default_config, load_config, main


def run_json(args, tmp_path, name="report.json"):
    out = tmp_path / name
    assert main(args + ["--out", str(out)]) == 0
    return json.loads(out.read_text())


class TestConfig:
    def test_shipped_config_matches_compiled_defaults(self):
        assert load_config() == default_config()

    def test_missing_file_falls_back(self, tmp_path):
        assert load_config(tmp_path / "absent.yaml") == default_config()

    def test_partial_file_is_merged(self, tmp_path):
        path = tmp_path / "config.yaml"
        path.write_text("ramsey:\n  nbar: 12.0\n")
        config = load_config(path)
        assert config["ramsey"]["nbar"] == 12.0
        assert config["ramsey"]["window_us"] == 1.0
        assert config["trap"] == default_config()["trap"]

    def test_every_numeric_flag_names_its_unit(self):
        parser = build_parser()
        subparsers = next(a for a in parser._actions if a.dest == "command")
        for name, sub in subparsers.choices.items():
            for action in sub._actions:
                if action.type in (float, ultrafast_ion._count):
                    assert "(" in action.help, f"{name} {action.option_strings}"


class TestCurves:
    def test_default_revival(self, tmp_path):
        out = tmp_path / "revival.csv"
        assert main(["revival", "--out", str(out)]) == 0
        columns = read_csv(out)
        peak = int(np.argmax(columns["visibility"]))
        assert columns["tau_us"][peak] == pytest.approx(30.864, abs=0.001)
        assert columns["visibility"][peak] == pytest.approx(1.0, abs=1e-6)

    def test_revival_without_kick_is_flat(self, tmp_path):
        out = tmp_path / "flat.csv"
        assert main(["revival", "--eta", "0", "--nbar", "0", "--out", str(out)]) == 0
        assert np.all(read_csv(out)["visibility"] == 1.0)

    def test_revival_needs_both_offsets(self, tmp_path):
        assert main(["revival", "--A", "0.03", "--out", str(tmp_path / "x.csv")]) == 2

    def test_default_rabi_curve(self, tmp_path):
        out = tmp_path / "rabi.csv"
        assert main(["rabi-curve", "--out", str(out)]) == 0
        columns = read_csv(out)
        first = ultrafast_ion._first_peak(columns["p_down_analytic"])
        assert columns["energy_nj"][first] == pytest.approx(38.0, abs=1.0)

    def test_cold_rabi_curve_reaches_one(self, tmp_path):
        out = tmp_path / "cold.csv"
        assert main(["rabi-curve", "--temperature-mk", "0", "--out", str(out)]) == 0
        columns = read_csv(out)
        assert np.max(columns["p_down_analytic"]) == pytest.approx(1.0, abs=1e-12)

    def test_rabi_curve_monte_carlo_columns(self, tmp_path):
        out = tmp_path / "mc.csv"
        args = ["rabi-curve", "--mc", "2e4", "--seed", "7", "--max-energy-nj", "60", "--step-nj", "6",
                "--out", str(out)]
        assert main(args) == 0
        columns = read_csv(out)
        gap = np.abs(columns["p_down_mc"] - columns["p_down_analytic"])
        assert np.all(gap <= 4 * columns["stderr"] + 1e-12)

    def test_rabi_curve_reports_both_pi_energies(self, tmp_path):
        report = run_json(["rabi-curve", "--format", "json", "--max-energy-nj", "60", "--step-nj", "6"],
                          tmp_path)
        inputs = report["inputs"]
        assert inputs["pi_energy_nj"] == pytest.approx(38.0)
        assert 0.95 * 38.0 < inputs["center_pi_energy_nj"] < 38.0

    def test_json_curve(self, tmp_path):
        report = run_json(["revival", "--format", "json", "--window-us", "0.1", "--step-us", "0.01"], tmp_path)
        assert report["command"] == "revival"
        assert len(report["results"]["columns"]["tau_us"]) == 21

    def test_ramsey_scan_to_stdout(self, capsys):
        assert main(["ramsey-scan", "--points", "11", "--span-hz", "1e4"]) == 0
        captured = capsys.readouterr()
        lines = captured.out.strip().splitlines()
        assert lines[0] == "detuning_hz,p_up_analytic"
        assert len(lines) == 12
        assert "✅" in captured.err


class TestReports:
    def test_magic(self, tmp_path):
        report = run_json(["magic", "--species", "Ba138+"], tmp_path)
        assert report["results"]["magic_wavelength_nm"] == pytest.approx(485.0, abs=2.0)

    def test_unknown_species_is_a_validation_error(self, tmp_path):
        assert main(["magic", "--species", "Xx1+", "--out", str(tmp_path / "m.json")]) == 2

    def test_species_table(self, capsys):
        assert main(["species"]) == 0
        out = capsys.readouterr().out
        for name in ("Ba138+", "Ca40+", "Sr88+", "Yb174+"):
            assert name in out

    def test_budget(self, tmp_path):
        report = run_json(["budget"], tmp_path)
        assert report["results"]["visibility"] == pytest.approx(0.47, abs=0.01)

    def test_feldman_cousins(self, tmp_path):
        report = run_json(["fc", "--measured", "0.971"], tmp_path)
        assert report["results"]["upper"] == 1.0
        assert report["results"]["lower"] == pytest.approx(0.928, abs=0.002)

    def test_lightshift_at_nominal_energies(self, tmp_path):
        report = run_json(["lightshift"], tmp_path)
        assert report["results"]["fidelity"] == pytest.approx(0.95, abs=0.02)
        assert report["inputs"]["sigma_energy_nj"] == pytest.approx(14.0)
        assert report["inputs"]["pi_energy_nj"] == pytest.approx(24.0)

    def test_lightshift_without_sigma_minus(self, tmp_path):
        report = run_json(["lightshift", "--sigma-energy-nj", "0"], tmp_path)
        assert report["results"]["fidelity"] == 0.0
        assert "no two-photon coupling" in report["results"]["note"]


class TestFitCommand:
    def test_empty_file_is_a_validation_error(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        assert main(["fit", "rabi", str(path)]) == 2

    def test_missing_file(self, tmp_path):
        assert main(["fit", "fringe", str(tmp_path / "absent.csv")]) == 2

    def test_wrong_dataset_for_model(self, tmp_path):
        path = write_csv(tmp_path / "vis.csv", {"tau_us": np.linspace(30, 31, 9),
                                                "visibility": np.full(9, 0.3),
                                                "visibility_err": np.full(9, 0.01)})
        assert main(["fit", "rabi", str(path)]) == 2

    def test_synth_then_fit_fringes(self, tmp_path):
        data = tmp_path / "scan.csv"
        assert main(["synth", "--mode", "ramsey_scan", "--seed", "3", "--out", str(data)]) == 0
        report = run_json(["fit", "fringe", str(data)], tmp_path)
        fringes = report["results"]["fringes"]
        assert len(fringes) == 1
        assert fringes[0]["converged"] is True
        assert 0.0 < fringes[0]["parameters"]["amplitude"]["value"] < 1.0

    def test_non_converged_fit_exits_with_one(self, tmp_path, monkeypatch):
        def stuck(*args, **kwargs):
            return FitResult(names=["omega", "nbar", "A", "B"], values=np.ones(4), stderr=np.ones(4),
                             covariance=np.eye(4), residual=1.0, converged=False,
                             extras={"tau_rev": 3e-5, "tau_rev_stderr": 1e-9, "degenerate": 0.0})

        monkeypatch.setattr(ultrafast_ion, "fit_revival", stuck)
        path = write_csv(tmp_path / "vis.csv", {"tau_us": np.linspace(30, 31, 9),
                                                "visibility": np.full(9, 0.3),
                                                "visibility_err": np.full(9, 0.01)})
        out = tmp_path / "fit.json"
        assert main(["fit", "revival", str(path), "--out", str(out)]) == 1
        assert json.loads(out.read_text())["results"]["converged"] is False
