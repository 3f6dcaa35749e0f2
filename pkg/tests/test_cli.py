"""Tests for the command-line bench and its exit codes."""

import json

import numpy as np

from consensusprobe.reporting import write_matrix_csv
from consensusprobe.ui.cli import cli


def lines_of(path):
    return path.read_text().splitlines()


class TestTconv:
    def test_line3_spectral_start(self, runner):
        result = runner.invoke(cli, ["tconv", "--rule", "metropolis", "--n", "3", "--epsilon", "0.01"])
        assert result.exit_code == 0
        assert "T=6" in result.output
        assert "lambda2=0.666667" in result.output
        assert "predicted_T=6" in result.output

    def test_line3_loose_threshold(self, runner):
        result = runner.invoke(cli, ["tconv", "--n", "3", "--epsilon", "0.25"])
        assert result.exit_code == 0
        assert "T=2" in result.output

    def test_lower_bound_reported(self, runner):
        result = runner.invoke(cli, ["tconv", "--n", "10", "--epsilon", "0.01"])
        assert result.exit_code == 0
        assert "lower_bound=15.3506" in result.output

    def test_not_reached_exits_2(self, runner):
        result = runner.invoke(
            cli,
            ["tconv", "--seq", "constant-edgeless", "--n", "4", "--init", "random:1", "--t-max", "50"],
        )
        assert result.exit_code == 2
        assert "T=not-reached" in result.output

    def test_random_restarts_with_jobs(self, runner):
        args = ["tconv", "--rule", "load-balancing", "--n", "6", "--init", "random:4", "--seed", "3"]
        sequential = runner.invoke(cli, args)
        parallel = runner.invoke(cli, args + ["--jobs", "2"])
        assert sequential.exit_code == 0
        assert parallel.exit_code == 0
        t_line = [line for line in sequential.output.splitlines() if line.startswith("T=")]
        assert t_line and t_line[0] in parallel.output.splitlines()

    def test_json_format(self, runner):
        result = runner.invoke(cli, ["-q", "tconv", "--n", "3", "--format", "json"])
        assert result.exit_code == 0
        data = json.loads(result.output)
        assert data["results"]["T"] == 6
        assert data["report_metadata"]["generator"] == "consensusprobe"


class TestSimulate:
    def test_one_round_rows(self, runner, tmp_path):
        result = runner.invoke(
            cli,
            ["simulate", "--n", "3", "--init", "vector:0,0,3", "--t-max", "1", "--out", str(tmp_path)],
        )
        assert result.exit_code == 0
        rows = lines_of(tmp_path / "trajectory.csv")
        assert rows[0] == "t,agent,value"
        assert {"1,1,0.0", "1,2,1.0", "1,3,2.0"} <= set(rows)
        assert lines_of(tmp_path / "variance.csv") == ["t,V", "0,6.0", "1,2.0"]

    def test_identity_keeps_variance(self, runner, tmp_path):
        result = runner.invoke(
            cli,
            [
                "simulate",
                "--rule", "custom:identity",
                "--n", "5",
                "--init", "random:1",
                "--t-max", "20",
                "--out", str(tmp_path),
            ],
        )
        assert result.exit_code == 0
        values = {line.split(",")[1] for line in lines_of(tmp_path / "variance.csv")[1:]}
        assert len(values) == 1

    def test_consensus_start_exits_1(self, runner, tmp_path):
        result = runner.invoke(
            cli, ["simulate", "--init", "vector:2,2,2", "--t-max", "5", "--out", str(tmp_path)]
        )
        assert result.exit_code == 1
        assert not (tmp_path / "trajectory.csv").exists()

    def test_vector_infers_n(self, runner, tmp_path):
        result = runner.invoke(
            cli, ["simulate", "--init", "vector:0,0,3", "--t-max", "2", "--out", str(tmp_path)]
        )
        assert result.exit_code == 0
        assert "n=3" in result.output

    def test_vector_length_mismatch(self, runner, tmp_path):
        result = runner.invoke(
            cli, ["simulate", "--n", "4", "--init", "vector:0,0,3", "--out", str(tmp_path)]
        )
        assert result.exit_code == 1

    def test_byte_identical_reruns(self, runner, tmp_path):
        args = [
            "simulate",
            "--rule", "load-balancing",
            "--seq", "seeded-random-spanning",
            "--n", "7",
            "--seed", "3",
            "--init", "random:1",
            "--t-max", "60",
        ]
        first = runner.invoke(cli, args + ["--out", str(tmp_path / "a")])
        second = runner.invoke(cli, args + ["--out", str(tmp_path / "b")])
        assert first.exit_code == second.exit_code == 0
        for name in ("trajectory.csv", "variance.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_step_size_above_bound_exits_1(self, runner, tmp_path):
        result = runner.invoke(
            cli,
            [
                "simulate",
                "--rule", "max-degree",
                "--rule-param", "step_size=0.9",
                "--n", "4",
                "--out", str(tmp_path),
            ],
        )
        assert result.exit_code == 1


class TestSpectral:
    def test_line3(self, runner):
        result = runner.invoke(cli, ["spectral", "--n", "3"])
        assert result.exit_code == 0
        assert "lambda2=0.666667" in result.output
        assert "pass=true" in result.output
        assert "linearization=exact" in result.output

    def test_line10_interval(self, runner):
        result = runner.invoke(cli, ["spectral", "--rule", "max-degree", "--n", "10"])
        assert result.exit_code == 0
        assert "interval=(0.94,1)" in result.output
        assert "lambda2=0.967" in result.output
        assert "tridiagonal_residual=0" in result.output

    def test_identity_fails_check_but_exits_0(self, runner):
        result = runner.invoke(cli, ["spectral", "--rule", "custom:identity", "--n", "4"])
        assert result.exit_code == 0
        assert "pass=false" in result.output
        assert "lambda2=none" in result.output

    def test_complete_graph_has_no_slow_mode(self, runner):
        result = runner.invoke(
            cli, ["spectral", "--rule", "max-degree", "--seq", "constant-complete", "--n", "3"]
        )
        assert result.exit_code == 0
        assert "lambda2=none" in result.output
        assert "predicted_T" not in result.output

    def test_nonlinear_rule_uses_numerical_jacobian(self, runner):
        result = runner.invoke(cli, ["spectral", "--rule", "custom:cubic-mean", "--n", "5"])
        assert result.exit_code == 0
        assert "linearization=numerical" in result.output

    def test_load_balancing_unsupported(self, runner):
        result = runner.invoke(cli, ["spectral", "--rule", "load-balancing", "--n", "5"])
        assert result.exit_code == 1

    def test_non_constant_sequence_rejected(self, runner):
        result = runner.invoke(cli, ["spectral", "--seq", "round-robin-single-edge", "--n", "5"])
        assert result.exit_code == 1

    def test_matrix_file_and_save(self, runner, tmp_path):
        matrix = np.array([[0.5, 0.5, 0.0], [0.5, 0.0, 0.5], [0.0, 0.5, 0.5]])
        path = write_matrix_csv(matrix, tmp_path / "input.csv")
        result = runner.invoke(
            cli, ["spectral", "--matrix", str(path), "--save-matrix", "--out", str(tmp_path / "out")]
        )
        assert result.exit_code == 0
        assert "source=file:" in result.output
        assert "lambda2=0.5" in result.output
        assert (tmp_path / "out" / "matrix.csv").read_text() == path.read_text()


class TestValidate:
    def test_round_robin_passes(self, runner):
        result = runner.invoke(cli, ["validate", "--seq", "round-robin-single-edge", "--n", "5", "--B", "4"])
        assert result.exit_code == 0
        assert "pass=true" in result.output
        assert "horizon=400" in result.output

    def test_round_robin_short_window_fails(self, runner):
        result = runner.invoke(cli, ["validate", "--seq", "round-robin-single-edge", "--n", "5", "--B", "2"])
        assert result.exit_code == 2
        assert "first_failing_window=0" in result.output
        assert "window=(0,2)" in result.output

    def test_edgeless_fails_at_first_window(self, runner):
        result = runner.invoke(cli, ["validate", "--seq", "constant-edgeless", "--n", "4", "--B", "3"])
        assert result.exit_code == 2
        assert "first_failing_window=0" in result.output

    def test_edgeless_without_window(self, runner):
        result = runner.invoke(cli, ["validate", "--seq", "constant-edgeless", "--n", "4"])
        assert result.exit_code == 1

    def test_window_hint_used(self, runner):
        result = runner.invoke(
            cli, ["validate", "--seq", "intermittent-line", "--seq-param", "period=3", "--n", "6"]
        )
        assert result.exit_code == 0
        assert "B=3" in result.output


class TestScaling:
    def test_small_sweep(self, runner, tmp_path):
        result = runner.invoke(cli, ["scaling", "--n-list", "4,6,8", "--out", str(tmp_path)])
        assert result.exit_code == 0
        assert "audit=true" in result.output
        rows = lines_of(tmp_path / "scaling.csv")
        assert rows[0] == "n,T,lower_bound,audit,upper_ratio"
        assert [row.split(",")[0] for row in rows[1:]] == ["4", "6", "8"]
        assert rows[1].startswith("4,11,")

    def test_needs_three_sizes(self, runner, tmp_path):
        result = runner.invoke(cli, ["scaling", "--n-list", "4,6", "--out", str(tmp_path)])
        assert result.exit_code == 1

    def test_sizes_below_three_rejected(self, runner, tmp_path):
        result = runner.invoke(cli, ["scaling", "--n-list", "2,4,6", "--out", str(tmp_path)])
        assert result.exit_code == 1

    def test_abort_writes_partial_csv(self, runner, tmp_path):
        result = runner.invoke(
            cli,
            [
                "scaling",
                "--seq", "constant-edgeless",
                "--init", "random:1",
                "--t-max", "20",
                "--n-list", "3,4,5",
                "--out", str(tmp_path),
            ],
        )
        assert result.exit_code == 2
        rows = lines_of(tmp_path / "scaling.csv")
        assert len(rows) == 4
        assert all(",not-reached," in row for row in rows[1:])


class TestErrorsAndConfig:
    def test_unknown_option_exits_1(self, runner):
        result = runner.invoke(cli, ["tconv", "--rounds", "5"])
        assert result.exit_code == 1

    def test_unknown_format_exits_1(self, runner):
        result = runner.invoke(cli, ["tconv", "--n", "3", "--format", "html"])
        assert result.exit_code == 1

    def test_unknown_rule_exits_1(self, runner):
        result = runner.invoke(cli, ["tconv", "--rule", "gossip", "--n", "3"])
        assert result.exit_code == 1

    def test_missing_n_exits_1(self, runner):
        result = runner.invoke(cli, ["tconv"])
        assert result.exit_code == 1

    def test_bad_config_exits_1(self, runner, tmp_path):
        config = tmp_path / "probe.yaml"
        config.write_text("epsilon: 3\n")
        result = runner.invoke(cli, ["tconv", "--n", "3", "--config", str(config)])
        assert result.exit_code == 1

    def test_unknown_format_in_config_exits_1(self, runner, tmp_path):
        config = tmp_path / "probe.yaml"
        config.write_text("format: xml\n")
        result = runner.invoke(cli, ["tconv", "--n", "3", "--config", str(config)])
        assert result.exit_code == 1
        assert isinstance(result.exception, SystemExit)

    def test_config_supplies_defaults(self, runner, tmp_path):
        config = tmp_path / "probe.conf"
        config.write_text("n = 3\nepsilon = 0.25\n")
        result = runner.invoke(cli, ["tconv", "--config", str(config)])
        assert result.exit_code == 0
        assert "T=2" in result.output

    def test_flags_override_config(self, runner, tmp_path):
        config = tmp_path / "probe.yaml"
        config.write_text("n: 3\nepsilon: 0.25\n")
        result = runner.invoke(cli, ["tconv", "--config", str(config), "--epsilon", "0.01"])
        assert result.exit_code == 0
        assert "T=6" in result.output

    def test_version(self, runner):
        result = runner.invoke(cli, ["--version"])
        assert result.exit_code == 0
        assert "consensusprobe" in result.output


class TestPlugins:
    def test_plugin_rule(self, runner, plugin_dir):
        result = runner.invoke(
            cli, ["tconv", "--plugin-dir", str(plugin_dir), "--rule", "custom:half-metropolis", "--n", "4"]
        )
        assert result.exit_code == 0
        assert "rule=half-metropolis" in result.output

    def test_drifting_plugin_rejected(self, runner, drifting_plugin_dir):
        result = runner.invoke(
            cli, ["tconv", "--plugin-dir", str(drifting_plugin_dir), "--rule", "custom:drift", "--n", "4"]
        )
        assert result.exit_code == 1

    def test_overflowing_plugin_exits_3(self, runner, exploding_plugin_dir):
        result = runner.invoke(
            cli,
            [
                "tconv",
                "--plugin-dir", str(exploding_plugin_dir),
                "--rule", "custom:explode",
                "--n", "4",
                "--init", "random:1",
            ],
        )
        assert result.exit_code == 3
