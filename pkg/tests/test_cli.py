import csv
import dataclasses
import io
import json
import math

import pytest
from click.testing import CliRunner

from novikov import reports, runs
from novikov.certificates import solve
from novikov.cli import main

FAST = ["--n-paths", "5000"]


@pytest.fixture
def runner():
    return CliRunner()


def run_json(runner, args, code=0, env=None):
    res = runner.invoke(main, args, env=env)
    assert res.exit_code == code, res.output + str(res.exception)
    report = json.loads(res.stdout)
    reports.validate(report)
    return report


class TestConstants:
    def test_rows(self, runner):
        rep = run_json(runner, ["constants", "--points", "21", "--a-lo", "-1", "--a-hi", "1"])
        rows = {r["a"]: r for r in rep["table"]["rows"]}
        zero = rows[0.0]
        assert (zero["alpha"], zero["beta"], zero["h"], zero["g"]) == (0.5, 0.5, 0.0, 0.0)
        assert zero["alpha_prime"] == pytest.approx(-1 / 6, abs=1e-15)
        m1 = rows[-1.0]
        assert (m1["alpha"], m1["h"]) == (1.0, 1.0)
        assert m1["beta"] is None and m1["g"] is None and m1["alpha_prime"] is None
        assert rep["verdicts"]["strictly_decreasing"] is True

    def test_default_grid_monotone(self, runner):
        rep = run_json(runner, ["constants"])
        rows = rep["table"]["rows"]
        assert len(rows) == 10_001
        # flags compare each row with its predecessor; beta starts one row later
        assert rows[0]["alpha_decreasing"] is None and rows[1]["beta_decreasing"] is None
        assert all(r["alpha_decreasing"] for r in rows[1:])
        assert all(r["beta_decreasing"] for r in rows[2:])
        assert rep["verdicts"]["strictly_decreasing"] is True

    def test_csv(self, runner):
        res = runner.invoke(main, ["constants", "--points", "3", "--a-lo", "0", "--a-hi", "2", "--format", "csv"])
        assert res.exit_code == 0
        table = list(csv.reader(io.StringIO(res.stdout)))
        assert tuple(table[0]) == reports.CONSTANTS_COLUMNS
        assert table[1][:3] == ["0.0", "0.5", "0.5"]
        assert len(table) == 4

    def test_range_error(self, runner):
        res = runner.invoke(main, ["constants", "--a-lo", "-2"])
        assert res.exit_code == 1 and "error" in res.stderr


class TestCounterexample:
    def test_witnessed(self, runner):
        rep = run_json(runner, ["counterexample", "--a", "1", "--eps", "0.2", *FAST])
        assert rep["final_verdict"] == runs.OPTIMALITY_WITNESSED
        assert rep["certificate"]["verification"]["passed"]
        assert rep["config"]["a"] == 1.0 and rep["config"]["master_seed"] == 42

    def test_surrogate_transcript(self, runner):
        rep = run_json(runner, ["counterexample", "--a", "0", "--eps", "0.5", *FAST])
        cert = rep["certificate"]
        assert cert["case"] == "zero-surrogate" and cert["surrogate_a"] == 1.0
        assert cert["construction_a"] == 1.0 and cert["construction_eps"] == 0.25

    def test_beta_minus_one_refused(self, runner):
        res = runner.invoke(main, ["counterexample", "--a", "-1", "--variant", "beta", *FAST])
        assert res.exit_code == 1
        assert res.stdout == ""
        assert "refused" in res.stderr and "does not exist" in res.stderr

    def test_analytic_failure_exit(self, runner, monkeypatch):
        good = solve(1.0, 0.2)
        bad = dataclasses.replace(good, b=0.05, lambda_=-math.log1p(0.05))
        monkeypatch.setattr(runs, "solve", lambda *a: bad)
        rep = run_json(runner, ["counterexample", *FAST], code=runs.EXIT_ANALYTIC)
        assert rep["final_verdict"] == "ANALYTIC-FAILURE"
        assert rep["estimates"] == {}

    def test_env_overrides(self, runner):
        rep = run_json(runner, ["counterexample"], env={"NOVIKOV_A": "-0.5", "NOVIKOV_N_PATHS": "3000"})
        assert rep["config"]["a"] == -0.5 and rep["config"]["n_paths"] == 3000

    def test_csv_long_format(self, runner):
        res = runner.invoke(main, ["counterexample", *FAST, "--format", "csv"])
        rows = list(csv.reader(io.StringIO(res.stdout)))
        assert rows[0] == ["section", "key", "value"]
        keyed = {(s, k): v for s, k, v in rows[1:]}
        assert keyed[("final_verdict", "")] == runs.OPTIMALITY_WITNESSED
        assert keyed[("config", "n_paths")] == "5000"
        assert keyed[("certificate", "checks[0].passed")] == "true"

    def test_dump_paths(self, runner, tmp_path):
        dump = tmp_path / "paths.csv"
        out = tmp_path / "rep.json"
        res = runner.invoke(main, ["counterexample", *FAST, "--dump-paths", str(dump), "--dump-limit", "10", "--out", str(out)])
        assert res.exit_code == 0
        rep = json.loads(out.read_text())
        assert rep["runtime"]["dump_paths"] == str(dump)
        lines = dump.read_text().splitlines()
        assert len({line.split(",")[0] for line in lines[1:]}) == 10


class TestOtherCommands:
    def test_novikov_demo(self, runner):
        rep = run_json(runner, ["novikov-demo", "--a", "0", *FAST, "--no-companion"])
        assert rep["final_verdict"] == "NOVIKOV-CONFIRMED"

    def test_novikov_demo_rejects_negative(self, runner):
        assert runner.invoke(main, ["novikov-demo", "--a", "-0.1"]).exit_code != 0

    def test_lb_lambda_zero(self, runner):
        rep = run_json(runner, ["lb-martingale", "--b", "0.5", "--lambda", "0", *FAST])
        rows = rep["estimates"]["rows"]
        assert [r["mean"] for r in rows] == [1.0, 1.0, 1.0]
        assert [r["t"] for r in rows] == [0.5, 1.0, 2.0]
        assert all(r["contains_1"] for r in rows)

    def test_bad_times(self, runner):
        res = runner.invoke(main, ["lb-martingale", "--b", "1", "--lambda", "0", "--times", "a,b"])
        assert res.exit_code == 2  # click usage error

    def test_schema(self, runner):
        res = runner.invoke(main, ["schema"])
        assert json.loads(res.stdout) == reports.load_schema()


class TestReplay:
    def test_round_trip(self, runner, tmp_path):
        out = tmp_path / "rep.json"
        res = runner.invoke(main, ["counterexample", "--a", "-0.5", *FAST, "--out", str(out)])
        assert res.exit_code == 0
        res = runner.invoke(main, ["replay", str(out), "--workers", "3"])
        assert res.exit_code == 0 and "identical" in res.stderr
        assert reports.deterministic_view(json.loads(res.stdout)) == reports.deterministic_view(json.loads(out.read_text()))

    def test_mismatch(self, runner, tmp_path):
        out = tmp_path / "rep.json"
        runner.invoke(main, ["lb-martingale", "--b", "1", "--lambda", "-0.5", *FAST, "--out", str(out)])
        rep = json.loads(out.read_text())
        row = rep["estimates"]["rows"][0]
        row["mean"] = math.nextafter(row["mean"], math.inf)
        out.write_text(json.dumps(rep))
        res = runner.invoke(main, ["replay", str(out)])
        assert res.exit_code == runs.EXIT_REPLAY_MISMATCH and "MISMATCH" in res.stderr

    def test_floats_round_trip_exactly(self):
        rep, _ = runs.run_counterexample(runs.default_config("counterexample", a=1.0, eps=0.2, variant="alpha", n_paths=2000, format="json"))
        again = json.loads(reports.to_json(rep))
        assert again["estimates"]["terminal_mass"]["mean"] == rep["estimates"]["terminal_mass"]["mean"]
        assert again["certificate"]["b"] == rep["certificate"]["b"]


class TestSchema:
    def test_rejects_missing_runtime(self):
        rep, _ = runs.run_lb_martingale(runs.default_config("lb-martingale", b=1.0, times=[1.0], n_paths=200, format="json", **{"lambda": 0.0}))
        doc = json.loads(reports.to_json(rep))
        del doc["runtime"]
        with pytest.raises(Exception):
            reports.validate(doc)

    def test_nonfinite_as_strings(self):
        assert reports.plain({"x": math.inf, "y": [math.nan]}) == {"x": "inf", "y": ["nan"]}
