import json

import numpy as np
import pytest
from click.testing import CliRunner

from rulcast.bayes import CtmcStats, PosteriorState
from rulcast.cli import main
from rulcast.ctmc import TaskSeverityModel
from rulcast.simulator import FleetProfile


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def tutorial_fixture(tmp_path):
    """Single-state model and a posterior whose effective rate is 0.5 with gamma 1."""
    model = TaskSeverityModel(("only",), [[0.0]], {"only": 1.0})
    model_path = tmp_path / "model.json"
    model.save(model_path)
    post = PosteriorState(
        mean=np.array([0.0, 0.5]),
        covariance=1e-12 * np.eye(2),
        gamma=1.0,
        ctmc_stats=CtmcStats.empty(model.states),
    )
    post_path = tmp_path / "posterior.json"
    post_path.write_text(post.to_json())
    return model_path, post_path


@pytest.fixture
def two_state_files(tmp_path, two_state_model):
    model_path = tmp_path / "model.json"
    two_state_model.save(model_path)
    fleet_path = tmp_path / "fleet.json"
    fleet_path.write_text(FleetProfile(n_robots=4).to_json())
    return model_path, fleet_path


class TestPredict:
    def test_approach1_tutorial_fixture(self, runner, tutorial_fixture, tmp_path):
        model_path, post_path = tutorial_fixture
        out = tmp_path / "rld.json"
        result = runner.invoke(main, [
            "predict", "--approach", "1", "--posterior", str(post_path),
            "--model", str(model_path), "--accuracy", "4", "--threshold", "10",
            "--out", str(out),
        ])
        assert result.exit_code == 0, result.output
        doc = json.loads(out.read_text())
        assert doc["approach"] == 1
        assert doc["ig"]["mean"] == pytest.approx(12.0)
        assert doc["ig"]["shape"] == pytest.approx(36.0)
        assert "median_hours" in doc

    def test_approach2_requires_seed(self, runner, tutorial_fixture, tmp_path):
        model_path, post_path = tutorial_fixture
        result = runner.invoke(main, [
            "predict", "--approach", "2", "--posterior", str(post_path),
            "--model", str(model_path), "--accuracy", "4", "--threshold", "10",
            "--out", str(tmp_path / "x.json"),
        ])
        assert result.exit_code == 1

    def test_approach2_writes_empirical(self, runner, tutorial_fixture, tmp_path):
        model_path, post_path = tutorial_fixture
        out = tmp_path / "rld2.json"
        result = runner.invoke(main, [
            "predict", "--approach", "2", "--posterior", str(post_path),
            "--model", str(model_path), "--accuracy", "4", "--threshold", "10",
            "--out", str(out), "--seed", "5", "--M", "500",
        ])
        assert result.exit_code == 0, result.output
        doc = json.loads(out.read_text())
        assert doc["approach"] == 2
        assert len(doc["failure_times"]) + doc["censored"] == 500


class TestWhatIfCommand:
    def test_three_scenarios_monotone(self, runner, tmp_path, two_state_model):
        model_path = tmp_path / "model.json"
        two_state_model.save(model_path)
        post = PosteriorState(
            mean=np.array([0.1, 0.05]),
            covariance=1e-12 * np.eye(2),
            gamma=0.2,
            ctmc_stats=CtmcStats.empty(two_state_model.states),
        )
        post_path = tmp_path / "post.json"
        post_path.write_text(post.to_json())
        out = tmp_path / "whatif.csv"
        result = runner.invoke(main, [
            "whatif", "--posterior", str(post_path), "--model", str(model_path),
            "--accuracy", "0", "--threshold", "6",
            "--pi", "1,0", "--pi", "0.5,0.5", "--pi", "0,1",
            "--out", str(out),
        ])
        assert result.exit_code == 0, result.output
        lines = out.read_text().strip().splitlines()
        assert len(lines) == 4
        import csv as csvmod

        rows = list(csvmod.DictReader(lines))
        medians = [float(r["median_hours"]) for r in rows]
        assert medians[0] > medians[1] > medians[2]

    def test_malformed_pi(self, runner, tutorial_fixture, tmp_path):
        model_path, post_path = tutorial_fixture
        result = runner.invoke(main, [
            "whatif", "--posterior", str(post_path), "--model", str(model_path),
            "--accuracy", "0", "--threshold", "6", "--pi", "abc",
            "--out", str(tmp_path / "w.csv"),
        ])
        assert result.exit_code == 1


class TestSimulateFit:
    def test_simulate_writes_robot_dirs(self, runner, two_state_files, tmp_path):
        model_path, fleet_path = two_state_files
        out = tmp_path / "fleet_out"
        result = runner.invoke(main, [
            "simulate", "--model", str(model_path), "--fleet", str(fleet_path),
            "--out", str(out), "--seed", "7",
        ])
        assert result.exit_code == 0, result.output
        dirs = sorted(out.glob("robot_*"))
        assert len(dirs) == 4
        for d in dirs:
            assert (d / "tasks.csv").exists()
            assert (d / "inspections.csv").exists()
            assert (d / "truth.json").exists()

    def test_simulate_requires_seed(self, runner, two_state_files, tmp_path):
        model_path, fleet_path = two_state_files
        result = runner.invoke(main, [
            "simulate", "--model", str(model_path), "--fleet", str(fleet_path),
            "--out", str(tmp_path / "x"),
        ])
        assert result.exit_code != 0

    def test_fit_then_predict_round_trip(self, runner, two_state_files, tmp_path,
                                         two_state_model):
        model_path, fleet_path = two_state_files
        data = tmp_path / "data"
        fits = tmp_path / "fits"
        r = runner.invoke(main, ["simulate", "--model", str(model_path),
                                 "--fleet", str(fleet_path), "--out", str(data),
                                 "--seed", "7"])
        assert r.exit_code == 0, r.output
        r = runner.invoke(main, ["fit", "--model", str(model_path),
                                 "--fleet", str(fleet_path), "--data", str(data),
                                 "--out", str(fits)])
        assert r.exit_code == 0, r.output
        posteriors = sorted(fits.glob("robot_*_up30.json"))
        assert posteriors
        # serialization round-trip: reloaded posterior reproduces the library result
        post = PosteriorState.from_json(posteriors[0].read_text())
        from rulcast.rld import effective_rate, rld_approach1
        from rulcast.ctmc import stationary_distribution

        pi = stationary_distribution(two_state_model)
        rate = effective_rate(post.mean, pi, two_state_model.severity_vector())
        closed = rld_approach1(1.0, 30.0, rate, post.gamma)
        out = tmp_path / "pred.json"
        r = runner.invoke(main, [
            "predict", "--approach", "1", "--posterior", str(posteriors[0]),
            "--model", str(model_path), "--accuracy", "1", "--threshold", "30",
            "--out", str(out),
        ])
        assert r.exit_code == 0, r.output
        doc = json.loads(out.read_text())
        assert doc["ig"]["mean"] == pytest.approx(closed.distribution.mean, abs=1e-12)


class TestErrorHandling:
    def test_missing_model_file(self, runner, tmp_path):
        result = runner.invoke(main, [
            "simulate", "--model", str(tmp_path / "nope.json"),
            "--fleet", str(tmp_path / "nope2.json"),
            "--out", str(tmp_path / "x"), "--seed", "1",
        ])
        assert result.exit_code != 0

    def test_malformed_model_json(self, runner, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        fleet = tmp_path / "fleet.json"
        fleet.write_text(FleetProfile().to_json())
        result = runner.invoke(main, [
            "simulate", "--model", str(bad), "--fleet", str(fleet),
            "--out", str(tmp_path / "x"), "--seed", "1",
        ])
        assert result.exit_code == 1
