"""Tests for config parsing and the command line driver."""

import hashlib
import json
import math
import os

import pytest

from roadcorr.analytic import rho
from roadcorr.cli import RunConfig, load_config_file, main, parse_config
from roadcorr.errors import ConfigError
from roadcorr.model import (
    NetworkGeometry,
    TrafficModel,
    normalized_pair_correlation,
)

REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def read_csv(path):
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    header = lines[0].split(",")
    return [dict(zip(header, line.split(","))) for line in lines[1:]]


class TestParseConfig:
    def test_defaults_match_shipped_config(self):
        shipped = load_config_file(os.path.join(REPO_ROOT, "configs",
                                                "default.cfg"))
        assert shipped == RunConfig()

    def test_traffic_and_scalars(self):
        config = parse_config(
            "traffic = lambda=0.02 c=4\n"
            "traffic = lambda=0.05 c=0\n"
            "r0 = 100\n"
            "t_points = 5\n"
            "methods = ppp, pcf-approx\n"
        )
        assert config.traffics == ((0.02, 4.0), (0.05, 0.0))
        assert config.r0 == 100.0
        assert config.t_points == 5
        assert config.methods == ("ppp", "pcf-approx")

    def test_comments_and_blank_lines_ignored(self):
        config = parse_config("# header\n\nseed = 7  # trailing\n")
        assert config.seed == 7

    def test_repeated_scalar_overwrites(self):
        assert parse_config("seed = 1\nseed = 2\n").seed == 2

    def test_unknown_key_reports_line(self):
        with pytest.raises(ConfigError) as err:
            parse_config("r0 = 100\n\nwavelength = 3\n")
        assert err.value.line == 3
        assert "unknown key" in str(err.value)

    def test_bad_value_reports_line(self):
        with pytest.raises(ConfigError) as err:
            parse_config("t_points = soon\n")
        assert err.value.line == 1

    def test_missing_equals_rejected(self):
        with pytest.raises(ConfigError):
            parse_config("r0 100\n")

    def test_traffic_line_errors(self):
        for bad in ("traffic = lambda=0.05\n",
                    "traffic = lambda=x c=4\n",
                    "traffic = rate=0.05 c=4\n"):
            with pytest.raises(ConfigError):
                parse_config(bad)

    def test_unknown_method_rejected(self):
        with pytest.raises(ConfigError):
            parse_config("methods = magic\n")

    def test_simulation_sample_floor(self):
        with pytest.raises(ConfigError):
            parse_config("methods = simulation\nn_samples = 500\n")
        config = parse_config("methods = ppp\nn_samples = 500\n")
        assert config.n_samples == 500

    def test_overfull_road_rejected_when_built(self):
        config = parse_config("traffic = lambda=0.3 c=4\n")
        with pytest.raises(ConfigError):
            config.traffic_models()

    def test_bad_lag_range(self):
        with pytest.raises(ConfigError):
            parse_config("t_lo = 5\nt_hi = 1\n")


class TestRunCommand:
    def run_main(self, tmp_path, config_text, extra=()):
        cfg = tmp_path / "sweep.cfg"
        cfg.write_text(config_text, encoding="utf-8")
        out = tmp_path / "results"
        code = main(["run", "--config", str(cfg), "--out", str(out), *extra])
        return code, out

    ANALYTIC = (
        "traffic = lambda=0.05 c=4\n"
        "methods = ppp,expansion,pcf-approx\n"
        "t_lo = 0\nt_hi = 30\nt_points = 7\n"
    )

    def test_analytic_sweep(self, tmp_path):
        code, out = self.run_main(tmp_path, self.ANALYTIC)
        assert code == 0

        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["command"] == "run"
        assert set(manifest["files"]) == {
            "curve_ppp_lam0.05_c4.0.csv",
            "curve_expansion_lam0.05_c4.0.csv",
            "curve_pcf-approx_lam0.05_c4.0.csv",
        }

        traffic = TrafficModel.from_intensity(0.05, 4.0)
        geom = NetworkGeometry(guard_radius=150.0, pathloss_exponent=3.0,
                               speed=10.0)
        for name, entry in manifest["files"].items():
            body = (out / name).read_bytes()
            assert hashlib.sha256(body).hexdigest() == entry["sha256"]
            rows = read_csv(out / name)
            assert len(rows) == entry["rows"] == 7
            method = rows[0]["method"]
            # the hardcore routes are undefined at the window edges
            want_invalid = [] if method == "ppp" else [0, 6]
            assert entry["invalid_points"] == want_invalid
            for i, row in enumerate(rows):
                if i in want_invalid:
                    assert row["value"] == "" and row["stderr"] == ""
                    assert row["valid"] == "false"
                else:
                    t = float(row["t"])
                    assert float(row["value"]) == rho(t, traffic, geom, method)
                    assert row["valid"] == "true"

    def test_ppp_curve_ignores_traffic(self, tmp_path):
        code, out = self.run_main(
            tmp_path,
            "traffic = lambda=0.05 c=4\ntraffic = lambda=0.02 c=4\n"
            "methods = ppp\nt_points = 7\n")
        assert code == 0
        a = read_csv(out / "curve_ppp_lam0.05_c4.0.csv")
        b = read_csv(out / "curve_ppp_lam0.02_c4.0.csv")
        assert [r["value"] for r in a] == [r["value"] for r in b]

    def test_rerun_is_byte_identical(self, tmp_path):
        (tmp_path / "a").mkdir()
        (tmp_path / "b").mkdir()
        _, out_a = self.run_main(tmp_path / "a", self.ANALYTIC)
        _, out_b = self.run_main(tmp_path / "b", self.ANALYTIC)
        for name in os.listdir(out_a):
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()

    def test_simulation_sweep(self, tmp_path):
        code, out = self.run_main(
            tmp_path,
            "traffic = lambda=0.05 c=4\nmethods = simulation\n"
            "t_lo = 1\nt_hi = 5\nt_points = 3\nn_samples = 1000\n")
        assert code == 0
        manifest = json.loads((out / "manifest.json").read_text())
        entry = manifest["files"]["curve_simulation_lam0.05_c4.0.csv"]
        assert entry["invalid_points"] == []
        assert entry["truncation_bias_bound"] > 0.0
        for row in read_csv(out / "curve_simulation_lam0.05_c4.0.csv"):
            assert float(row["stderr"]) > 0.0
            assert -1.0 <= float(row["value"]) <= 1.0

    def test_seed_override_lands_in_manifest(self, tmp_path):
        code, out = self.run_main(
            tmp_path, "methods = ppp\nt_points = 3\n", extra=("--seed", "7"))
        assert code == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["config"]["seed"] == 7

    def test_json_format(self, tmp_path):
        code, out = self.run_main(tmp_path, self.ANALYTIC,
                                  extra=("--format", "json"))
        assert code == 0
        rows = json.loads((out / "curve_pcf-approx_lam0.05_c4.0.json")
                          .read_text())
        assert len(rows) == 7
        assert rows[0]["value"] is None and rows[0]["valid"] is False
        assert isinstance(rows[1]["value"], float) and rows[1]["valid"] is True

    def test_no_temp_files_left_behind(self, tmp_path):
        _, out = self.run_main(tmp_path, self.ANALYTIC)
        assert not [n for n in os.listdir(out) if n.endswith(".tmp")]

    def test_missing_config_file(self, tmp_path, capsys):
        assert main(["run", "--config", str(tmp_path / "absent.cfg")]) == 1
        assert "config error" in capsys.readouterr().err

    def test_bad_config_contents(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("nope = 1\n", encoding="utf-8")
        assert main(["run", "--config", str(cfg)]) == 1
        assert "line 1" in capsys.readouterr().err

    def test_bad_flag(self, capsys):
        assert main(["run", "--nope"]) == 1
        capsys.readouterr()

    def test_missing_subcommand(self, capsys):
        assert main([]) == 1
        capsys.readouterr()


class TestPcfCommand:
    def test_pcf_tables(self, tmp_path):
        cfg = tmp_path / "sweep.cfg"
        cfg.write_text("traffic = lambda=0.05 c=4\ntraffic = lambda=0.02 c=4\n",
                       encoding="utf-8")
        out = tmp_path / "results"
        assert main(["pcf", "--config", str(cfg), "--out", str(out)]) == 0

        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["command"] == "pcf"
        assert set(manifest["files"]) == {"pcf_lam0.05_c4.0.csv",
                                          "pcf_lam0.02_c4.0.csv"}

        for lam in (0.05, 0.02):
            traffic = TrafficModel.from_intensity(lam, 4.0)
            rows = read_csv(out / f"pcf_lam{lam!r}_c4.0.csv")
            assert len(rows) == 64
            for row in rows:
                d = float(row["d_over_c"])
                value = float(row["value"])
                assert value == normalized_pair_correlation(d, traffic)
                assert float(row["asymptote"]) == 1.0 - lam * 4.0
                if d < 1.0:
                    assert value == 0.0
            last = rows[-1]
            assert float(last["d_over_c"]) == 8.0
            assert abs(float(last["value"]) - float(last["asymptote"])) <= 1e-3

    def test_pcf_default_config(self, tmp_path):
        out = tmp_path / "results"
        assert main(["pcf", "--out", str(out)]) == 0
        assert (out / "pcf_lam0.05_c4.0.csv").exists()
