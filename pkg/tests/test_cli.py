import json

import numpy as np
import pytest

from crwsim import cli
from crwsim.cli import ConfigError, load_config
from crwsim.presets import (PresetError, get_preset, preset_names,
                            variant_spec)


class TestPresets:
    def test_all_names_resolve(self):
        assert len(preset_names()) == 12
        for name in preset_names():
            p = get_preset(name)
            assert p.kind in ("ensemble", "sweep", "minimal", "bic")

    def test_expansion_is_pure(self):
        a = get_preset("fig2a-dicke")
        b = get_preset("fig2a-dicke")
        assert a.spec == b.spec and a.settings == b.settings

    def test_unknown_preset(self):
        with pytest.raises(PresetError) as exc:
            get_preset("fig9")
        assert exc.value.code == "UNKNOWN_PRESET"
        assert "fig2a-dicke" in str(exc.value)

    def test_unknown_variant(self):
        with pytest.raises(PresetError) as exc:
            variant_spec(get_preset("fig3c-chirality"), "huge")
        assert exc.value.code == "UNKNOWN_VARIANT"

    def test_variant_overrides_apply(self):
        p = get_preset("fig3c-chirality")
        small = variant_spec(p, "small")
        giant = variant_spec(p, "giant")
        assert small.G1 == 0.0 and giant.G1 == 0.067
        assert giant.G2 == 0.15


class TestConfigFile:
    def test_roundtrip(self, tmp_path):
        cfg = tmp_path / "exp.toml"
        cfg.write_text("""
n_traj = 10
master_seed = 3
[system]
g = 0.2
n = 1
N = 3
m_min = -30
m_max = 34
[integrator]
dt = 0.01
t_max = 5.0
""")
        spec, settings, n_traj, seed = load_config(str(cfg))
        assert spec.g == 0.2 and spec.N == 3
        assert settings.dt == 0.01 and settings.t_max == 5.0
        assert n_traj == 10 and seed == 3

    def test_preset_reference_with_overrides(self, tmp_path):
        cfg = tmp_path / "exp.toml"
        cfg.write_text('preset = "fig2a-dicke"\n[system]\nN_T = 5\n')
        spec, settings, n_traj, _ = load_config(str(cfg))
        assert spec.N_T == 5
        assert spec.g == 0.1  # inherited from the preset
        assert n_traj == 4000

    def test_unknown_top_level_key(self, tmp_path):
        cfg = tmp_path / "exp.toml"
        cfg.write_text("trajectories = 7\n")
        with pytest.raises(ConfigError) as exc:
            load_config(str(cfg))
        assert exc.value.code == "UNKNOWN_KEY"

    def test_unknown_section_key(self, tmp_path):
        cfg = tmp_path / "exp.toml"
        cfg.write_text("[system]\ncoupling = 0.1\n")
        with pytest.raises(ConfigError) as exc:
            load_config(str(cfg))
        assert exc.value.code == "UNKNOWN_KEY"

    def test_missing_file(self):
        with pytest.raises(ConfigError) as exc:
            load_config("/nonexistent/exp.toml")
        assert exc.value.code == "MISSING_CONFIG"


def run_cli(*argv):
    return cli.main(list(argv))


class TestRunCommand:
    def test_minimal_preset_outputs(self, tmp_path):
        out = tmp_path / "out"
        assert run_cli("run", "--preset", "fig3d-minimal",
                       "--out-dir", str(out)) == 0
        assert (out / "amplitudes-small.csv").exists()
        assert (out / "amplitudes-giant.csv").exists()
        summary = json.loads((out / "summary.json").read_text())
        assert summary["preset"] == "fig3d-minimal"
        assert len(summary["variants"]) == 2
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["system"]["g"] == 0.1
        assert "code_version" in manifest

    def test_bic_preset_outputs(self, tmp_path):
        out = tmp_path / "out"
        assert run_cli("run", "--preset", "sm-fig3-bic",
                       "--out-dir", str(out)) == 0
        summary = json.loads((out / "summary.json").read_text())
        for variant in summary["variants"]:
            assert variant["bic_matrix"] and variant["bic_oracle"]

    def test_csv_format(self, tmp_path):
        out = tmp_path / "out"
        run_cli("run", "--preset", "fig3d-minimal", "--out-dir", str(out))
        raw = (out / "amplitudes-small.csv").read_bytes()
        assert b"\r" not in raw
        text = raw.decode("utf-8").splitlines()
        assert text[0].startswith("t,abs_eps_T")
        # full precision: a non-integer value carries many digits
        assert any(len(f.split(".")[-1]) > 12
                   for f in text[2].split(",") if "." in f)

    def test_ensemble_run_and_byte_identical_rerun(self, tmp_path):
        args = ["run", "--config", str(tmp_path / "exp.toml"),
                "--trajectories", "8", "--seed", "5"]
        (tmp_path / "exp.toml").write_text("""
preset = "fig2a-dicke"
[system]
N_T = 3
N_C = 0
[integrator]
dt = 0.01
t_max = 4.0
sample_stride = 50
""")
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert run_cli(*args, "--out-dir", str(out1)) == 0
        assert run_cli(*args, "--out-dir", str(out2)) == 0
        for name in ("timeseries-default.csv", "intensity-default.csv"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
        manifest = json.loads((out1 / "manifest.json").read_text())
        assert manifest["n_traj"] == 8 and manifest["master_seed"] == 5

    def test_unknown_preset_exit_code(self, tmp_path, capsys):
        assert run_cli("run", "--preset", "nope",
                       "--out-dir", str(tmp_path)) == 1
        err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert err["error"] == "UNKNOWN_PRESET"

    def test_invalid_spec_exit_code(self, tmp_path, capsys):
        cfg = tmp_path / "exp.toml"
        cfg.write_text("[system]\nJ = -1.0\n")
        assert run_cli("run", "--config", str(cfg),
                       "--out-dir", str(tmp_path / "o")) == 1
        err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert err["error"] == "NONPOSITIVE_J"


class TestSweepCommand:
    def test_sweep_outputs_and_fit(self, tmp_path):
        cfg = tmp_path / "exp.toml"
        cfg.write_text("""
preset = "fig2a-dicke"
[system]
N_C = 0
[integrator]
dt = 0.01
t_max = 25.0
sample_stride = 20
""")
        out = tmp_path / "sweep"
        assert run_cli("sweep", "--config", str(cfg), "--axis", "N_T",
                       "--values", "16,24,32", "--trajectories", "64",
                       "--seed", "2", "--out-dir", str(out)) == 0
        table = (out / "sweep-default.csv").read_text().splitlines()
        assert table[0] == "N_T,I,T_h,eta,C_TT"
        assert len(table) == 4
        summary = json.loads((out / "summary.json").read_text())
        # even at low statistics collective decay accelerates with N_T
        assert summary["fits"]["default"]["exponent"] > 1.0

        fit_out = tmp_path / "fit.json"
        assert run_cli("fit", "--input", str(out / "sweep-default.csv"),
                       "--x", "N_T", "--y", "I",
                       "--out", str(fit_out)) == 0
        fit = json.loads(fit_out.read_text())
        assert fit["n_points"] == 3

    def test_bad_axis(self, tmp_path, capsys):
        assert run_cli("sweep", "--preset", "fig2a-dicke", "--axis", "mass",
                       "--values", "1,2,3", "--out-dir", str(tmp_path)) == 1
        err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert err["error"] == "BAD_AXIS"


class TestFitCommand:
    def test_fit_from_csv(self, tmp_path, capsys):
        csv = tmp_path / "pts.csv"
        rows = ["N_T,I"] + [f"{n},{0.01 * n**2.0}" for n in (10, 20, 30, 40)]
        csv.write_text("\n".join(rows) + "\n")
        assert run_cli("fit", "--input", str(csv)) == 0
        out = json.loads(capsys.readouterr().out.strip())
        assert out["exponent"] == pytest.approx(2.0, abs=1e-9)

    def test_missing_input(self, capsys):
        assert run_cli("fit", "--input", "/no/such.csv") == 1
        err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert err["error"] == "MISSING_INPUT"

    def test_bad_columns(self, tmp_path, capsys):
        csv = tmp_path / "pts.csv"
        csv.write_text("a,b\n1,2\n")
        assert run_cli("fit", "--input", str(csv)) == 1
        err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert err["error"] == "BAD_COLUMNS"
