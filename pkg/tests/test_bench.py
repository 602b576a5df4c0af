import io
import json

import numpy as np
import pandas as pd
import pytest
from pydantic import ValidationError

import config
from bench import cli
from bench.report import emit_report, render_report, report_to_csv, report_to_json, round_significant
from bench.runner import aggregate_rows, objective_ratio, run_experiment
from bench.synthetic import cluster_size, generate_synthetic, generate_synthetic_with_center
from errors import InvalidArgumentError
from geometry.loader import save_dataset_csv
from models.experiment import AggregateRow, BudgetEntry, ExperimentConfig, RunReport, RunRow
from privacy.noise import RngStream


def small_config(**overrides):
    fields = dict(n=60, d=2, sweep_R=[100.0], reps=1, algorithms=["dpgd-baseline"], record_timing=False)
    fields.update(overrides)
    return ExperimentConfig(**fields)


# --- Synthetic data ---

def test_synthetic_cluster_and_outliers():
    data, mu = generate_synthetic_with_center(1000, 5, RngStream(1))
    assert data.shape == (1000, 5)
    assert np.linalg.norm(mu) == pytest.approx(50.0)
    near = np.linalg.norm(data - mu, axis=1) <= 1.0
    assert near.sum() == cluster_size(1000) == 900
    assert np.all(np.linalg.norm(data, axis=1) <= 100.2)


def test_synthetic_is_seeded():
    np.testing.assert_array_equal(generate_synthetic(50, 3, RngStream(7)), generate_synthetic(50, 3, RngStream(7)))


def test_synthetic_needs_ten_points():
    with pytest.raises(InvalidArgumentError):
        generate_synthetic(9, 2, RngStream(0))


# --- Runner ---

def test_objective_ratio():
    assert objective_ratio(3.0, 2.0) == 1.5
    assert objective_ratio(0.0, 0.0) == 1.0
    assert objective_ratio(1.0, 0.0) == float("inf")


def test_run_experiment_rows():
    cfg = small_config(algorithms=["dpgd-baseline", "loc-dpgd"], sweep_R=[100.0, 1000.0], reps=2)
    report = run_experiment(cfg)
    assert len(report.rows) == 2 * 2 * 2
    assert [(row.rep, row.R, row.algorithm) for row in report.rows[:4]] == [
        (0, 100.0, "dpgd-baseline"), (0, 100.0, "loc-dpgd"),
        (0, 1000.0, "dpgd-baseline"), (0, 1000.0, "loc-dpgd"),
    ]
    rho = cfg.zcdp_budget().rho
    for row in report.rows:
        assert row.ratio >= 1 - 1e-9
        assert row.wall_ms == 0.0
        assert row.seed == cfg.seed
        assert row.budget_rho == pytest.approx(rho, rel=1e-12)
        assert sum(entry.amount for entry in row.budget_trace if entry.kind == "zcdp") == pytest.approx(rho, rel=1e-12)
    assert len(report.aggregates) == 4
    assert all(agg.reps == 2 for agg in report.aggregates)


def test_failed_rows_score_the_origin():
    report = run_experiment(small_config(algorithms=["loc-dpgd"], n=20))
    row = report.rows[0]
    assert row.failed
    assert row.delta_hat is None
    assert [entry.stage for entry in row.budget_trace][-1] == "finetune (skipped)"


def test_pure_budget_rows():
    cfg = small_config(algorithms=["sinvs"], d=1, n=30, sweep_R=[1.0], r=0.05, epsilon=2.0)
    row = run_experiment(cfg).rows[0]
    assert row.budget_pure_epsilon == 2.0
    assert row.budget_rho == 0.0
    assert row.ratio >= 1 - 1e-9


def test_reports_are_reproducible():
    cfg = small_config(algorithms=["dpgd-baseline", "loc-dpgd"], reps=3)
    first = report_to_json(run_experiment(cfg))
    second = report_to_json(run_experiment(cfg))
    assert first == second


def test_worker_count_does_not_change_rows():
    serial = run_experiment(small_config(reps=4, workers=1))
    threaded = run_experiment(small_config(reps=4, workers=2))
    assert [row.model_dump() for row in serial.rows] == [row.model_dump() for row in threaded.rows]


def test_aggregates_keep_first_seen_order():
    rows = [
        RunRow(algorithm=alg, R=R, rep=rep, objective=1.0, oracle_objective=1.0, ratio=ratio,
               wall_ms=0.0, failed=ratio > 2, seed=0)
        for rep, (alg, R, ratio) in enumerate([
            ("loc-dpgd", 10.0, 1.0), ("dpgd-baseline", 10.0, 3.0), ("loc-dpgd", 10.0, 2.0),
        ])
    ]
    aggregates = aggregate_rows(rows)
    assert [(agg.algorithm, agg.R) for agg in aggregates] == [("loc-dpgd", 10.0), ("dpgd-baseline", 10.0)]
    assert aggregates[0].mean_ratio == 1.5
    assert aggregates[1].failures == 1
    assert aggregate_rows([]) == []


# --- Reports ---

def test_round_significant():
    assert round_significant(1.23456789012345) == 1.23456789012
    assert round_significant(0.0) == 0.0
    assert round_significant(float("inf")) == float("inf")


def test_empty_sweep_writes_header_only():
    report = run_experiment(small_config(sweep_R=[]))
    assert report.rows == []
    assert report_to_csv(report) == ",".join(config.CSV_COLUMNS) + "\n"


def test_csv_report_reads_back():
    report = run_experiment(small_config(reps=2))
    frame = pd.read_csv(io.StringIO(report_to_csv(report)))
    assert list(frame.columns) == config.CSV_COLUMNS
    assert len(frame) == 2
    np.testing.assert_allclose(frame["ratio"], [row.ratio for row in report.rows], rtol=1e-11)
    assert list(frame["failed"]) == [row.failed for row in report.rows]


def test_json_report_echoes_config_and_version():
    report = run_experiment(small_config())
    text = render_report(report, "json")
    assert text.endswith("}\n")
    payload = json.loads(text)
    assert payload["version"] == config.VERSION
    assert payload["config"]["n"] == 60
    assert payload["rows"][0]["budget_trace"][0]["kind"] == "zcdp"


def test_unknown_format_raises():
    with pytest.raises(InvalidArgumentError):
        render_report(RunReport(config=small_config()), "xml")


def test_emit_report_writes_file(tmp_path):
    report = run_experiment(small_config())
    path = tmp_path / "nested" / "run.csv"
    text = emit_report(report, "csv", path)
    assert path.read_bytes() == text.encode("utf-8")
    assert b"\r\n" not in path.read_bytes()


def test_schema_matches_models():
    schema = json.loads(config.RUN_REPORT_SCHEMA_FILE.read_text(encoding="utf-8"))
    defs = schema["$defs"]
    assert set(schema["required"]) == set(RunReport.model_fields)
    assert set(defs["ExperimentConfig"]["properties"]) == set(ExperimentConfig.model_fields)
    assert set(defs["RunRow"]["properties"]) == set(RunRow.model_fields)
    assert defs["RunRow"]["required"] == config.CSV_COLUMNS
    assert set(defs["AggregateRow"]["properties"]) == set(AggregateRow.model_fields)
    assert set(defs["BudgetEntry"]["properties"]) == set(BudgetEntry.model_fields)
    assert defs["Algorithm"]["enum"] == config.ALGORITHMS


# --- Configuration ---

def test_config_defaults():
    cfg = ExperimentConfig()
    assert cfg.epsilon == config.DEFAULT_EPSILON
    assert cfg.sweep_R == config.DEFAULT_SWEEP_R
    assert cfg.approx_budget().delta == config.DEFAULT_DELTA


def test_rho_only_config_derives_epsilon():
    cfg = ExperimentConfig(rho=0.5)
    assert cfg.epsilon is None
    assert cfg.zcdp_budget().rho == 0.5
    assert cfg.approx_budget().epsilon > 0.5


@pytest.mark.parametrize("overrides", [
    {"r": 200.0, "sweep_R": [100.0]},
    {"sweep_R": [0.0]},
    {"algorithms": ["loc-dpgd", "loc-dpgd"]},
    {"algorithms": ["median-of-means"]},
    {"n": 5},
    {"reps": 0},
    {"delta": 1.0},
    {"algorithms": ["sinvs"], "d": 3},
    {"algorithms": ["sinvs"], "d": 2, "n": 100},
    {"algorithms": ["sinvs"], "d": 2, "n": 12, "sweep_R": [1000.0], "r": 0.05},
    {"epsilon": 1.0, "rho": 0.5},
])
def test_invalid_configs(overrides):
    with pytest.raises(ValidationError):
        ExperimentConfig(**overrides)


# --- Command line ---

def test_cli_writes_report(tmp_path, capsys):
    out = tmp_path / "run.csv"
    code = cli.main(["--n", "50", "--d", "2", "--sweep-R", "100", "--reps", "1",
                     "--algos", "dpgd-baseline", "--no-timing", "--out", str(out)])
    assert code == cli.EXIT_OK
    assert out.read_text(encoding="utf-8").startswith(",".join(config.CSV_COLUMNS) + "\n")
    assert "mean_ratio" in capsys.readouterr().out


def test_cli_prints_json_to_stdout(capsys):
    code = cli.main(["--n", "50", "--d", "2", "--sweep-R", "100", "--reps", "1",
                     "--algos", "dpgd-baseline", "--format", "json", "--no-timing"])
    assert code == cli.EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["config"]["record_timing"] is False
    assert len(payload["rows"]) == 1


def test_cli_config_file_and_overrides(tmp_path, capsys):
    path = tmp_path / "experiment.json"
    path.write_text(json.dumps({"n": 40, "d": 2, "sweep_R": [50.0], "reps": 1, "algorithms": ["dpgd-baseline"]}))
    code = cli.main(["--config", str(path), "--n", "45", "--format", "json"])
    assert code == cli.EXIT_OK
    assert json.loads(capsys.readouterr().out)["config"]["n"] == 45


def test_cli_invalid_configuration():
    assert cli.main(["--r", "200", "--sweep-R", "100"]) == cli.EXIT_CONFIG


def test_cli_malformed_config_file(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    assert cli.main(["--config", str(path)]) == cli.EXIT_CONFIG


@pytest.mark.parametrize("payload", [[1, 2, 3], "n=40", 7])
def test_cli_config_file_must_be_an_object(tmp_path, payload):
    path = tmp_path / "experiment.json"
    path.write_text(json.dumps(payload))
    assert cli.main(["--config", str(path)]) == cli.EXIT_CONFIG


def test_cli_rejects_two_budgets():
    assert cli.main(["--eps", "1", "--rho", "0.5", "--sweep-R", "100"]) == cli.EXIT_CONFIG


def test_cli_budget_flag_replaces_file_budget(tmp_path, capsys):
    path = tmp_path / "experiment.json"
    path.write_text(json.dumps({"n": 40, "d": 2, "sweep_R": [50.0], "reps": 1,
                                "algorithms": ["dpgd-baseline"], "epsilon": 2.0}))
    code = cli.main(["--config", str(path), "--rho", "0.25", "--format", "json", "--no-timing"])
    assert code == cli.EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["config"]["epsilon"] is None
    assert payload["rows"][0]["budget_rho"] == 0.25


def test_cli_missing_files(tmp_path):
    assert cli.main(["--config", str(tmp_path / "absent.json")]) == cli.EXIT_IO
    assert cli.main(["--data", str(tmp_path / "absent.csv"), "--sweep-R", "100"]) == cli.EXIT_IO


def test_cli_dataset_sets_shape(tmp_path, capsys):
    path = tmp_path / "points.csv"
    save_dataset_csv(np.random.default_rng(2).normal(size=(30, 3)), path)
    code = cli.main(["--data", str(path), "--sweep-R", "10", "--reps", "2",
                     "--algos", "dpgd-baseline", "--format", "json", "--no-timing"])
    assert code == cli.EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert (payload["config"]["n"], payload["config"]["d"]) == (30, 3)
    assert len(payload["rows"]) == 2
    assert payload["rows"][0]["oracle_objective"] == payload["rows"][1]["oracle_objective"]


# DPGD's ratio dips between 1e2 (T * eta too short to reach the cluster) and
# 1e3, then grows once the steps overshoot it.
SWEEP_R = [1e2, 1e3, 1e4, 1e6, 1e8]


@pytest.mark.slow
def test_localization_pays_off_at_large_radius():
    cfg = ExperimentConfig(
        n=1000, d=10, sweep_R=SWEEP_R, reps=10, rho=10.0, delta=1e-6, r=0.05,
        algorithms=["dpgd-baseline", "loc-dpgd"], record_timing=False,
    )
    report = run_experiment(cfg)
    by_key = {(agg.algorithm, agg.R): agg for agg in report.aggregates}
    dpgd = [by_key[("dpgd-baseline", R)].mean_ratio for R in SWEEP_R]
    loc = [by_key[("loc-dpgd", R)].mean_ratio for R in SWEEP_R]

    assert all(by_key[("loc-dpgd", R)].failures == 0 for R in SWEEP_R)
    assert all(l <= g for l, g in zip(loc, dpgd))
    assert dpgd[2] < dpgd[3] < dpgd[4]
    assert loc[4] < 1.01
    for row in report.rows:
        assert row.ratio >= 1 - 1e-9
