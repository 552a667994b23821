"""CLI tests: config validation, subcommand dispatch, artifact formats,
exit-code discipline, and reproducibility of emitted files."""

import csv
import io
import json

import numpy as np
import pytest

from circulant_clt import ConfigError, run_clt_experiment
from circulant_clt.cli import (
    emit_report,
    emit_samples_csv,
    main,
    parse_config,
)
from circulant_clt.harness import ExperimentConfig

MINIMAL = {"n": 512, "poly": [0, 0, 1], "family": "gaussian", "seed": 7}


def small_summary():
    config = parse_config({**MINIMAL, "n": 32, "m": 40})
    return run_clt_experiment(config)


class TestParseConfig:
    def test_minimal_with_defaults(self):
        config = parse_config(MINIMAL)
        assert isinstance(config, ExperimentConfig)
        assert config.n == 512
        assert config.m == 2000
        assert config.poly.coefficients == (1.0,)
        assert config.ensemble.family == "gaussian"
        assert config.master_seed == 7
        assert config.worker_count >= 1

    def test_accepts_json_text(self):
        config = parse_config(json.dumps(MINIMAL))
        assert config.n == 512

    def test_rejects_degree_one_coefficient(self):
        with pytest.raises(ConfigError, match="degree"):
            parse_config({**MINIMAL, "poly": [0, 1, 1]})

    def test_missing_keys_named(self):
        with pytest.raises(ConfigError, match="n"):
            parse_config({"poly": [0, 0, 1]})
        with pytest.raises(ConfigError, match="poly"):
            parse_config({"n": 16})

    def test_unknown_keys_rejected(self):
        with pytest.raises(ConfigError, match="workers"):
            parse_config({**MINIMAL, "workers": 4})

    def test_invalid_json(self):
        with pytest.raises(ConfigError, match="JSON"):
            parse_config("{not json")
        with pytest.raises(ConfigError):
            parse_config(json.dumps([1, 2]))

    def test_unknown_family(self):
        with pytest.raises(ConfigError, match="family"):
            parse_config({**MINIMAL, "family": "levy"})


class TestEmitters:
    def test_empty_samples_csv_has_header_only(self):
        assert emit_samples_csv([], []) == "replica,raw_trace,W\n"

    def test_csv_round_trip(self):
        summary = small_summary()
        text = emit_report(summary, "csv")
        rows = list(csv.DictReader(io.StringIO(text)))
        assert len(rows) == summary.m
        got = np.array([float(r["raw_trace"]) for r in rows])
        assert np.array_equal(got, summary.raw_traces)

    def test_json_round_trip_bit_exact(self):
        summary = small_summary()
        fields = json.loads(emit_report(summary, "json"))
        assert fields["variance_w"] == summary.variance_w
        assert fields["ks_distance"] == summary.ks_distance
        assert fields["raw_trace_mean"] == summary.raw_trace_mean
        assert tuple(fields["standardized_moments"]) == summary.standardized_moments

    def test_text_shows_target_next_to_variance(self):
        summary = small_summary()
        text = emit_report(summary, "text")
        (variance_line,) = [l for l in text.splitlines() if "variance_w" in l]
        assert "target" in variance_line and "2.0" in variance_line

    def test_unknown_format(self):
        with pytest.raises(ConfigError):
            emit_report(small_summary(), "yaml")


class TestVarianceCommand:
    def test_prints_exact_and_float(self, capsys):
        assert main(["variance", "--poly", "0,0,1"]) == 0
        assert capsys.readouterr().out == "2\n2.0\n"

    def test_mixed_polynomial(self, capsys):
        assert main(["variance", "--poly", "0,0,1,1"]) == 0
        assert capsys.readouterr().out == "8\n8.0\n"

    def test_rejects_linear_term(self, capsys):
        assert main(["variance", "--poly", "0,1,1"]) == 2
        assert "degree" in capsys.readouterr().err


class TestDensityTableCommand:
    def test_table_contents(self, tmp_path, capsys):
        assert main(["--out", str(tmp_path), "density-table", "--p", "3",
                     "--n", "200"]) == 0
        stdout = capsys.readouterr().out
        assert (tmp_path / "table.csv").read_text() == stdout
        rows = list(csv.DictReader(io.StringIO(stdout)))
        assert [r["s"] for r in rows] == ["0", "1", "2"]
        densities = [float(r["density"]) for r in rows]
        assert abs(densities[0]) < 0.01
        assert abs(densities[1] - 0.5) < 0.01
        assert abs(densities[2] - 0.5) < 0.01
        assert [float(r["f_density"]) for r in rows] == [0.0, 0.5, 0.5]
        for r in rows:
            gap = abs(float(r["density"]) - float(r["f_density"]))
            assert float(r["gap"]) == pytest.approx(gap, abs=1e-15)


class TestSimulateCommand:
    def test_writes_artifacts(self, tmp_path, capsys):
        code = main(["--out", str(tmp_path), "simulate", "--n", "64",
                     "--poly", "0,0,1", "--seed", "9", "--m", "50"])
        assert code == 0
        doc = json.loads((tmp_path / "summary.json").read_text())
        assert doc["config"]["n"] == 64
        assert doc["config"]["seed"] == 9
        assert "worker_count" not in doc["config"]
        assert doc["experiment"]["target_variance_exact"] == "2"
        assert doc["stein"] is None
        samples = (tmp_path / "samples.csv").read_text()
        assert samples.startswith("replica,raw_trace,W\n")
        assert len(samples.splitlines()) == 51
        assert "target" in capsys.readouterr().out

    def test_config_file(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({**MINIMAL, "n": 32, "m": 40}))
        assert main(["--out", str(tmp_path), "simulate", "--config", str(path)]) == 0
        doc = json.loads((tmp_path / "summary.json").read_text())
        assert doc["experiment"]["m"] == 40

    def test_config_echo_preserves_semantic_fields(self, tmp_path):
        # emit(parse(doc)) keeps every semantic key, with defaults filled
        path = tmp_path / "config.json"
        path.write_text(json.dumps({**MINIMAL, "n": 32, "m": 40}))
        main(["--out", str(tmp_path), "simulate", "--config", str(path)])
        echo = json.loads((tmp_path / "summary.json").read_text())["config"]
        assert echo == {
            "n": 32,
            "m": 40,
            "poly": [0.0, 0.0, 1.0],
            "family": "gaussian",
            "seed": 7,
            "centering": "sample_mean",
        }

    def test_worker_count_invariance_excluding_wall_time(self, tmp_path):
        outs = []
        for workers in ("1", "8"):
            out = tmp_path / f"w{workers}"
            assert main(["--out", str(out), "simulate", "--n", "64",
                         "--poly", "0,0,1,1", "--seed", "3", "--m", "80",
                         "--workers", workers]) == 0
            doc = json.loads((out / "summary.json").read_text())
            del doc["experiment"]["wall_time_s"]
            outs.append(json.dumps(doc, sort_keys=True))
        assert outs[0] == outs[1]

    def test_missing_required_flag(self, tmp_path, capsys):
        assert main(["--out", str(tmp_path), "simulate", "--poly", "0,0,1"]) == 2
        assert "n" in capsys.readouterr().err


class TestTvBoundCommand:
    def test_smoothness_refusal_exit_code(self, tmp_path, capsys):
        code = main(["--out", str(tmp_path), "tv-bound", "--n", "64",
                     "--poly", "0,0,1", "--family", "rademacher", "--m", "40"])
        assert code == 2
        err = capsys.readouterr().err
        assert "smooth" in err and "rademacher" in err

    def test_reports_all_components(self, tmp_path, capsys):
        code = main(["--out", str(tmp_path), "tv-bound", "--n", "64",
                     "--poly", "0,0,1", "--family", "uniform_symmetric",
                     "--seed", "5", "--m", "40"])
        assert code == 0
        stdout = capsys.readouterr().out
        for name in ("kappa0_hat", "kappa1_hat", "kappa2_hat", "sigma2_hat",
                     "tv_bound"):
            assert name in stdout
        doc = json.loads((tmp_path / "summary.json").read_text())
        stein = doc["stein"]
        assert stein["tv_bound"] > 0
        assert stein["sigma2_target_scaled"] == pytest.approx(64 * 2.0)
        assert doc["experiment"] is None


class TestOtherCommands:
    def test_norm_scaling_table(self, tmp_path, capsys):
        code = main(["--out", str(tmp_path), "norm-scaling", "--family",
                     "rademacher", "--sizes", "16,32", "--trials", "4",
                     "--seed", "2"])
        assert code == 0
        rows = list(csv.DictReader(io.StringIO((tmp_path / "table.csv").read_text())))
        assert [r["n"] for r in rows] == ["16", "32"]
        assert all(float(r["max_ratio"]) >= float(r["mean_ratio"]) for r in rows)

    def test_moments_table(self, tmp_path, capsys):
        code = main(["--out", str(tmp_path), "moments", "--n", "64",
                     "--poly", "0,0,1", "--seed", "4", "--m", "60",
                     "--max-order", "4"])
        assert code == 0
        rows = list(csv.DictReader(io.StringIO((tmp_path / "table.csv").read_text())))
        assert [r["order"] for r in rows] == ["1", "2", "3", "4"]
        assert float(rows[1]["standardized_moment"]) == pytest.approx(1.0)
        assert float(rows[3]["standardized_target"]) == 3.0
        # central 4th-moment target is 3 * sigma^4 with sigma^2 = 2
        assert float(rows[3]["gaussian_target"]) == 12.0
        assert float(rows[2]["gaussian_target"]) == 0.0

    def test_io_failure_exit_code(self, tmp_path, capsys):
        blocker = tmp_path / "blocked"
        blocker.write_text("a file, not a directory")
        code = main(["--out", str(blocker / "sub"), "simulate", "--n", "16",
                     "--poly", "0,0,1", "--m", "10"])
        assert code == 3

    def test_output_dir_env_var(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("CIRCULANT_CLT_OUT", str(tmp_path / "from-env"))
        assert main(["density-table", "--p", "2", "--n", "10"]) == 0
        assert (tmp_path / "from-env" / "table.csv").exists()
