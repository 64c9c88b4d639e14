"""End-to-end runs of the command line, in process, against temp dirs."""

import json
import math

import numpy as np
import pytest

from snopto.cli import load_config, main, parse_quantity
from snopto.errors import ConfigError
from snopto.feasibility import ExperimentConfig, pre_report
from snopto.materials import get_material, omega_sn
from snopto.synth import read_series

TWO_PI = 2.0 * math.pi


class TestParseQuantity:
    @pytest.mark.parametrize("text,expected", [
        ("0.14", 0.14),
        ("-3.5", -3.5),
        ("1e7", 1e7),
        ("10 mHz", TWO_PI * 0.010),
        ("10mHz", TWO_PI * 0.010),
        ("0.2 THz", TWO_PI * 0.2e12),
        ("1 Hz", TWO_PI),
        ("300 K", 300.0),
        ("15 mK", 0.015),
        ("432 mW", 0.432),
        ("4.8 nW", 4.8e-9),
        ("200 g", 0.2),
        ("0.2 kg", 0.2),
        ("184 amu", 184 * 1.66053906660e-27),
        ("0.0478 A2", 4.78e-22),
        ("0.0478 A^2", 4.78e-22),
        ("1.6 h", 5760.0),
        ("13 d", 13 * 86400.0),
        ("200 s", 200.0),
        ("50 ms", 0.05),
    ])
    def test_accepted(self, text, expected):
        assert parse_quantity(text) == pytest.approx(expected, rel=1e-9)

    @pytest.mark.parametrize("text", ["", "abc", "3 furlongs", "inf", "nan", "1 QHz"])
    def test_rejected(self, text):
        with pytest.raises(ConfigError):
            parse_quantity(text)

    def test_passthrough_numbers(self):
        assert parse_quantity(0.14) == 0.14
        assert parse_quantity(7) == 7.0


class TestConfigFile:
    def test_key_value_document(self, tmp_path):
        p = tmp_path / "run.conf"
        p.write_text(
            "# a comment\n"
            "\n"
            "omega-cm = 10 mHz\n"
            "t0 = 300 K\n"
            "material = W\n"
        )
        conf = load_config(p)
        assert conf == {"omega_cm": "10 mHz", "t0": "300 K", "material": "W"}

    def test_bad_line(self, tmp_path):
        p = tmp_path / "run.conf"
        p.write_text("this is not a setting\n")
        with pytest.raises(ConfigError):
            load_config(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "absent.conf")

    def test_json_report_accepted(self, tmp_path):
        p = tmp_path / "r.json"
        p.write_text(json.dumps({"config": {"amp": 0.62, "kind": "dip"}}))
        assert load_config(p) == {"amp": 0.62, "kind": "dip"}


class TestMaterial:
    def test_single(self, capsys):
        assert main(["material", "W"]) == 0
        out = capsys.readouterr().out
        assert "W" in out
        assert f"{omega_sn(get_material('W')):.4f}" in out

    def test_all_rows(self, capsys):
        assert main(["material", "--all"]) == 0
        lines = [l for l in capsys.readouterr().out.splitlines() if l.strip()]
        assert len(lines) == 1 + 7

    def test_unknown(self, capsys):
        assert main(["material", "Xx"]) == 2
        assert "unknown material" in capsys.readouterr().err

    def test_no_argument(self):
        assert main(["material"]) == 2


class TestSpectrum:
    def test_pre_files_and_feature(self, tmp_path, capsys):
        assert main(["spectrum", "--prescription", "pre", "--outdir", str(tmp_path)]) == 0
        payload = json.loads((tmp_path / "spectrum_pre_seed0.json").read_text())
        feat = payload["result"]["feature"]
        assert feat["kind"] == "peak"
        assert feat["center"] == pytest.approx(payload["result"]["omega_q"], rel=1e-12)
        data = np.loadtxt(tmp_path / "spectrum_pre_seed0.csv")
        assert data.shape[1] == 2
        assert np.all(data[:, 1] > 0)

    def test_qm_flat_at_feature_frequency(self, tmp_path):
        assert main(["spectrum", "--prescription", "qm", "--outdir", str(tmp_path)]) == 0
        payload = json.loads((tmp_path / "spectrum_qm_seed0.json").read_text())
        assert payload["result"]["feature"] is None
        base = payload["result"]["baseline"]
        wq = payload["result"]["omega_q"]
        gamma_m = payload["config"]["omega_cm"] / payload["config"]["q"]
        data = np.loadtxt(tmp_path / "spectrum_qm_seed0.csv")
        mask = np.abs(data[:, 0] - wq) <= 10 * gamma_m
        assert mask.sum() > 100
        assert np.max(np.abs(data[mask, 1] / base - 1.0)) < 0.01

    def test_post_dip(self, tmp_path):
        assert main(["spectrum", "--prescription", "post", "--beta", "1e4",
                     "--outdir", str(tmp_path)]) == 0
        payload = json.loads((tmp_path / "spectrum_post_seed0.json").read_text())
        assert payload["result"]["feature"]["kind"] == "dip"
        assert payload["config"]["beta"] == pytest.approx(1e4, rel=1e-12)


class TestDynamics:
    def test_trajectory_csv(self, tmp_path):
        assert main(["dynamics", "--t-final", "100", "--dt", "0.0034",
                     "--store-every", "50", "--x0", "1e-9",
                     "--outdir", str(tmp_path)]) == 0
        data = np.loadtxt(tmp_path / "dynamics_W_seed0.csv")
        assert data.shape[1] == 7
        energy = data[:, 6]
        assert np.max(np.abs(energy / energy[0] - 1.0)) < 1e-9

    def test_requires_t_final(self, capsys):
        assert main(["dynamics"]) == 2
        assert "t-final" in capsys.readouterr().err


class TestSynth:
    def test_round_trip_and_determinism(self, tmp_path):
        args = ["synth", "--kind", "dip", "--amp", "0.62", "--gamma", "1",
                "--duration", "100", "--dt", "0.14", "--seed", "7"]
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(args + ["--outdir", str(a)]) == 0
        assert main(args + ["--outdir", str(b)]) == 0
        fa, fb = a / "synth_dip_seed7.csv", b / "synth_dip_seed7.csv"
        assert fa.read_bytes() == fb.read_bytes()
        series = read_series(fa)
        assert series.n == 714 and series.dt == 0.14 and series.seed == 7

    def test_flat_needs_no_amp(self, tmp_path):
        assert main(["synth", "--kind", "flat", "--duration", "10", "--dt", "0.1",
                     "--outdir", str(tmp_path)]) == 0

    def test_domain_error_exits_one(self, tmp_path, capsys):
        rc = main(["synth", "--kind", "dip", "--amp", "1.5", "--gamma", "1",
                   "--duration", "10", "--dt", "0.1", "--outdir", str(tmp_path)])
        assert rc == 1


class TestDetect:
    def test_report_and_config_round_trip(self, tmp_path):
        args = ["detect", "--truth", "dip", "--amp", "0.62", "--duration", "200",
                "--dt", "0.14", "--yth", "2", "--n", "300", "--seed", "11"]
        assert main(args + ["--outdir", str(tmp_path)]) == 0
        emitted = tmp_path / "detect_dip_seed11.json"
        payload = json.loads(emitted.read_text())
        r = payload["result"]
        assert r["p_correct"] + r["p_wrong"] + r["p_indecision"] == pytest.approx(1.0, abs=1e-12)
        assert payload["master_seed"] == 11
        rerun = tmp_path / "rerun"
        assert main(["detect", "--config", str(emitted), "--outdir", str(rerun)]) == 0
        assert emitted.read_bytes() == (rerun / "detect_dip_seed11.json").read_bytes()

    def test_flag_overrides_config_file(self, tmp_path):
        conf = tmp_path / "run.conf"
        conf.write_text(
            "truth = dip\namp = 0.5\nduration = 140\ndt = 0.14\nyth = 2\nn = 50\n")
        assert main(["detect", "--config", str(conf), "--amp", "0.62",
                     "--outdir", str(tmp_path)]) == 0
        payload = json.loads((tmp_path / "detect_dip_seed0.json").read_text())
        assert payload["config"]["amp"] == 0.62
        assert payload["config"]["duration"] == 140.0

    def test_truth_must_match_kind(self, capsys):
        assert main(["detect", "--truth", "peak", "--kind", "dip", "--amp", "0.6",
                     "--duration", "100", "--dt", "0.14", "--yth", "1"]) == 2

    def test_missing_required_flag(self, capsys):
        assert main(["detect", "--truth", "dip", "--amp", "0.62"]) == 2
        assert "--duration" in capsys.readouterr().err


class TestTauMin:
    def test_fit_only_matches_printed_fit(self, tmp_path):
        assert main(["taumin", "--kind", "dip", "--amp", "0.62", "--p", "10",
                     "--fit-only", "--outdir", str(tmp_path)]) == 0
        payload = json.loads((tmp_path / "taumin_dip_seed0.json").read_text())
        fit = payload["result"]["fit"]
        assert fit["coherence_times"] == pytest.approx(30.348595213319456, rel=1e-9)
        assert fit["seconds"] == pytest.approx(30.348595213319456 * 2.0, rel=1e-9)

    def test_small_search_runs(self, tmp_path):
        assert main(["taumin", "--kind", "dip", "--amp", "0.62", "--p", "25",
                     "--n", "300", "--seed", "3", "--outdir", str(tmp_path)]) == 0
        payload = json.loads((tmp_path / "taumin_dip_seed3.json").read_text())
        r = payload["result"]
        assert r["tau_min"] > 0
        assert r["n_trials"] == 300
        assert r["confidence_p"] == pytest.approx(0.25)

    def test_missing_amp(self, capsys):
        assert main(["taumin", "--kind", "dip"]) == 2
        assert "--amp" in capsys.readouterr().err


class TestFeasibility:
    def test_pre_matches_library(self, tmp_path):
        assert main(["feasibility", "--prescription", "pre", "--outdir", str(tmp_path)]) == 0
        payload = json.loads((tmp_path / "feasibility_pre_seed0.json").read_text())
        r = payload["result"]
        lib = pre_report(ExperimentConfig.reference_pre())
        assert r["tau_min_scaled"] == pytest.approx(lib.tau_min_scaled, rel=1e-12)
        assert r["input_power"] == pytest.approx(lib.input_power, rel=1e-12)
        assert r["peak_height_or_dip"] == pytest.approx(lib.peak_height_or_dip, rel=1e-12)
        assert all(r["validity_flags"].values())

    def test_post_sweep(self, tmp_path):
        assert main(["feasibility", "--prescription", "post", "--sweep",
                     "--n-grid", "121", "--outdir", str(tmp_path)]) == 0
        payload = json.loads((tmp_path / "feasibility_post_seed0.json").read_text())
        assert 0.5 < payload["result"]["sweep"]["law_ratio"] < 2.0
        curve = np.loadtxt(tmp_path / "feasibility_post_seed0_sweep.csv")
        assert curve.shape == (121, 2)
        assert np.all(curve[:, 1] > 0)

    def test_prescription_required(self, capsys):
        assert main(["feasibility"]) == 2

    def test_unit_suffixes_through_config(self, tmp_path):
        conf = tmp_path / "run.conf"
        conf.write_text("prescription = pre\nomega-cm = 10 mHz\nt0 = 300 K\nmass = 200 g\n")
        assert main(["feasibility", "--config", str(conf), "--outdir", str(tmp_path)]) == 0
        payload = json.loads((tmp_path / "feasibility_pre_seed0.json").read_text())
        assert payload["config"]["omega_cm"] == pytest.approx(TWO_PI * 0.010, rel=1e-12)
        assert payload["config"]["mass"] == 0.2


class TestHarness:
    def test_outdir_env_var(self, tmp_path, monkeypatch):
        monkeypatch.setenv("SNOPTO_OUTDIR", str(tmp_path / "envdir"))
        assert main(["synth", "--kind", "flat", "--duration", "10", "--dt", "0.1"]) == 0
        assert (tmp_path / "envdir" / "synth_flat_seed0.csv").exists()

    def test_unknown_flag_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            main(["detect", "--nonsense", "1"])
        assert exc.value.code == 2

    def test_version_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--version"])
        assert exc.value.code == 0

    def test_unknown_config_key_rejected(self, tmp_path, capsys):
        conf = tmp_path / "run.conf"
        conf.write_text("truth = dip\namp = 0.62\nduration = 140\ndt = 0.14\nyth = 2\nwidget = 3\n")
        assert main(["detect", "--config", str(conf)]) == 2
        assert "widget" in capsys.readouterr().err
