"""Tests for the CLI: subcommand contracts, exit codes, output schemas and
reproducibility."""

import csv
import json

import numpy as np
import pytest
from click.testing import CliRunner

from evoqe.cli import main


@pytest.fixture
def runner():
    return CliRunner()


def records(path):
    with open(path) as stream:
        return [json.loads(line) for line in stream if line.strip()]


def strip_timestamps(recs):
    return [{k: v for k, v in r.items() if k != "timestamp"} for r in recs]


class TestRunEvolution:
    def test_cycle_record_count(self, runner, tmp_path):
        # loose optimizer tolerance leaves each cycle room to improve, so the
        # stall criterion stays quiet and all requested cycles run
        out = tmp_path / "run.jsonl"
        result = runner.invoke(main, [
            "run-evolution", "ring:8", "--ansatz", "xy-half", "--cycles", "3",
            "--stall", "1e-12", "--energy-tol", "1e-4", "--max-iter", "30",
            "-o", str(out),
        ])
        assert result.exit_code == 0
        recs = records(out)
        assert len(recs) == 4  # cycle 0 (plain VQE) + 3 evolution cycles
        assert [r["cycle"] for r in recs] == [0, 1, 2, 3]

    def test_ring4_fidelity(self, runner, tmp_path):
        out = tmp_path / "run.jsonl"
        result = runner.invoke(main, ["run-evolution", "ring:4", "-o", str(out)])
        assert result.exit_code == 0
        assert records(out)[-1]["fidelity"] == pytest.approx(1.0, abs=1e-6)

    def test_malformed_lattice_exit_2(self, runner):
        result = runner.invoke(main, ["run-evolution", "ring:-3"])
        assert result.exit_code == 2

    def test_capacity_exit_3(self, runner):
        result = runner.invoke(main, ["run-evolution", "ring:40"])
        assert result.exit_code == 3

    def test_reproducible_modulo_timestamp(self, runner, tmp_path):
        args = ["run-evolution", "ring:4", "--energy-tol", "1e-8", "--seed", "5"]
        first, second = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        assert runner.invoke(main, args + ["-o", str(first)]).exit_code == 0
        assert runner.invoke(main, args + ["-o", str(second)]).exit_code == 0
        a = strip_timestamps(records(first))
        b = strip_timestamps(records(second))
        # wall-clock fields vary; everything else must match byte for byte
        for rec in a + b:
            rec.pop("wall_seconds")
        assert a == b

    def test_provenance_fields(self, runner, tmp_path):
        out = tmp_path / "run.jsonl"
        runner.invoke(main, ["run-evolution", "ring:4", "-o", str(out)])
        record = records(out)[0]
        for key in ("config", "config_hash", "seed", "version", "timestamp"):
            assert key in record

    def test_plot_dir(self, runner, tmp_path):
        out = tmp_path / "run.jsonl"
        plots = tmp_path / "figures"
        result = runner.invoke(main, [
            "run-evolution", "ring:4", "-o", str(out), "--plot-dir", str(plots),
        ])
        assert result.exit_code == 0
        assert (plots / "cycle_energies.png").exists()
        assert (plots / "trajectory.png").exists()

    def test_explicit_bitstring_init(self, runner, tmp_path):
        out = tmp_path / "run.jsonl"
        result = runner.invoke(main, [
            "run-evolution", "ring:4", "--init", "0101", "-o", str(out),
        ])
        assert result.exit_code == 0


class TestLandscape:
    def test_grid_csv(self, runner, tmp_path):
        out = tmp_path / "grid.csv"
        result = runner.invoke(main, [
            "landscape", "meanfield:5", "--grid", "16", "-o", str(out),
        ])
        assert result.exit_code == 0
        with open(out) as stream:
            rows = list(csv.DictReader(stream))
        assert len(rows) == 256
        best = min(rows, key=lambda r: float(r["energy"]))
        # grid minimum at the node nearest (pi/2, pi/2)
        node = 2 * np.pi / 16 * 4  # closest grid point to pi/2
        assert float(best["theta1"]) == pytest.approx(node)
        assert float(best["theta2"]) == pytest.approx(node)
        assert -6.0 <= float(best["energy"]) <= -5.9

    def test_wrong_parameter_count_exit_2(self, runner):
        result = runner.invoke(main, ["landscape", "meanfield:8"])
        assert result.exit_code == 2


class TestCensus:
    def test_ring4_single_minimum(self, runner, tmp_path):
        out = tmp_path / "census.jsonl"
        result = runner.invoke(main, [
            "census", "ring:4", "--restarts", "10", "--energy-tol", "1e-8",
            "-o", str(out),
        ])
        assert result.exit_code == 0
        record = records(out)[0]
        assert record["unique_count"] == 1
        assert record["min_energy"] == pytest.approx(-8.0, abs=1e-4)


class TestRandomBatch:
    def test_ratios_and_determinism(self, runner, tmp_path):
        args = [
            "random-batch", "--n", "4", "--instances", "3", "--cycles", "2",
            "--energy-tol", "1e-8", "--seed", "11",
        ]
        first, second = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        assert runner.invoke(main, args + ["-o", str(first)]).exit_code == 0
        assert runner.invoke(main, args + ["-o", str(second)]).exit_code == 0
        a, b = records(first), records(second)
        assert strip_timestamps(a) == strip_timestamps(b)
        for record in a[:-1]:
            assert record["ratio"] <= 1 + 1e-12


class TestPlateauProbe:
    def test_statistics_record(self, runner, tmp_path):
        out = tmp_path / "probe.jsonl"
        result = runner.invoke(main, [
            "plateau-probe", "cube:3x3x2", "--trials", "30", "-o", str(out),
        ])
        assert result.exit_code == 0
        record = records(out)[0]
        assert record["neel_energy"] == pytest.approx(-33.0)
        assert record["min_energy"] <= record["mean_energy"] <= record["max_energy"]


class TestExact:
    def test_meanfield5(self, runner, tmp_path):
        out = tmp_path / "exact.jsonl"
        result = runner.invoke(main, ["exact", "meanfield:5", "-o", str(out)])
        assert result.exit_code == 0
        assert records(out)[0]["eigenvalues"][0] == pytest.approx(-6.0)

    def test_capacity_exit_3(self, runner):
        assert runner.invoke(main, ["exact", "ring:30"]).exit_code == 3


class TestRuntimeEstimate:
    def test_explicit_counts(self, runner, tmp_path):
        out = tmp_path / "rt.jsonl"
        result = runner.invoke(main, [
            "runtime-estimate", "--n1q", "6400", "--n2q", "11500",
            "--groups", "3", "--shots", "8192", "-o", str(out),
        ])
        assert result.exit_code == 0
        assert records(out)[0]["seconds_per_evaluation"] == pytest.approx(126, abs=1)

    def test_missing_inputs_exit_2(self, runner):
        assert runner.invoke(main, ["runtime-estimate"]).exit_code == 2

    def test_spec_driven(self, runner, tmp_path):
        out = tmp_path / "rt.jsonl"
        result = runner.invoke(main, [
            "runtime-estimate", "--spec", "ring:6", "--cycles", "2", "-o", str(out),
        ])
        assert result.exit_code == 0
        record = records(out)[0]
        assert record["groups"] == 3
        assert record["n_2q_sequential"] > 0


class TestSampleAnalysis:
    def test_schema(self, runner, tmp_path):
        out = tmp_path / "sa.jsonl"
        result = runner.invoke(main, [
            "sample-analysis", "ring:4", "--shots", "1024",
            "--energy-tol", "1e-8", "-o", str(out),
        ])
        assert result.exit_code == 0
        record = records(out)[0]
        for key in ("lattice", "shots", "unique_count", "sampled_energy",
                    "exact_energy", "fidelity"):
            assert key in record


class TestConfigFile:
    def test_file_sets_defaults_flags_override(self, runner, tmp_path):
        config = tmp_path / "run.cfg"
        config.write_text("cycles=2\nstall=1e-2\nenergy-tol=1e-8\n")
        out = tmp_path / "run.jsonl"
        result = runner.invoke(main, [
            "run-evolution", "ring:4", "--config", str(config), "-o", str(out),
        ])
        assert result.exit_code == 0
        recs = records(out)
        assert recs[0]["config"]["cycles"] == 2  # from the config file
        assert recs[0]["config"]["stall"] == 1e-2

        result = runner.invoke(main, [
            "run-evolution", "ring:4", "--config", str(config),
            "--cycles", "1", "-o", str(out),
        ])
        assert result.exit_code == 0
        assert records(out)[0]["config"]["cycles"] == 1  # the flag wins

    def test_malformed_config_exit_2(self, runner, tmp_path):
        config = tmp_path / "bad.cfg"
        config.write_text("cycles 2\n")
        result = runner.invoke(main, ["run-evolution", "ring:4", "--config", str(config)])
        assert result.exit_code == 2
