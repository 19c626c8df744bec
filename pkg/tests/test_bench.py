"""Benchmark harness: reports, thresholds, estimates, CLI."""

import json

import pytest

from heatsteer.bench import (
    check_thresholds,
    estimate_table,
    format_table,
    run_scenario,
    write_reports,
)
from heatsteer.cli import bench_main
from heatsteer.config import RunConfig


def tiny_config(**kw):
    base = dict(width=10, height=10, north=10.0, workers=2,
                forced_iterations=20, clock="wall", seed=3)
    base.update(kw)
    return RunConfig(**base)


def test_run_scenario_both_modes():
    reports = run_scenario(tiny_config(), "tiny", modes=["sync", "async"],
                           reps=2, warmup=False)
    assert set(reports) == {"sync", "async"}
    for mode_reports in reports.values():
        assert len(mode_reports) == 2
        for r in mode_reports:
            assert len(r.workers) == 2
            assert all(w["iterations"] == 20 for w in r.workers)


def test_report_schema_stable_across_runs():
    cfg = tiny_config()
    a = run_scenario(cfg, "tiny", reps=1, warmup=False)["sync"][0].to_record()
    b = run_scenario(cfg, "tiny", reps=1, warmup=False)["sync"][0].to_record()
    timing_keys = {"total_wall", "timestamp", "verified_residual"}
    worker_timing = {"wall_time", "wait_time", "halo_wait_time", "comm_time"}

    def strip(rec):
        rec = {k: v for k, v in rec.items() if k not in timing_keys}
        rec["workers"] = [
            {k: v for k, v in w.items() if k not in worker_timing}
            for w in rec["workers"]
        ]
        return rec

    assert strip(a) == strip(b)
    assert a["config_hash"] == b["config_hash"]


def test_reports_serialize_as_json_lines(tmp_path):
    reports = run_scenario(tiny_config(), "tiny", reps=1, warmup=False)
    out = tmp_path / "reports.jsonl"
    write_reports(reports, out)
    lines = out.read_text().splitlines()
    assert len(lines) == 1
    rec = json.loads(lines[0])
    assert rec["scenario"] == "tiny"
    assert rec["iterations"] == {"1": 20, "2": 20}
    assert format_table(reports)  # renders without error


def test_warmup_discarded():
    reports = run_scenario(tiny_config(), "tiny", reps=1, warmup=True)
    assert len(reports["sync"]) == 1
    assert reports["sync"][0].rep == 1


def test_check_thresholds_pass_and_fail():
    cfg = tiny_config(delays={1: 0.005})
    reports = run_scenario(cfg, "tiny", modes=["sync", "async"], reps=1,
                           warmup=False)
    ok = check_thresholds(
        reports,
        {"sync_min_worker_wall": 0.05, "async_max_undelayed_wall": 5.0},
        cfg,
    )
    assert ok == []
    bad = check_thresholds(
        reports, {"async_max_undelayed_wall": 1e-9}, cfg
    )
    assert bad and "undelayed" in bad[0]


def test_estimate_matches_model():
    table = estimate_table(200_000, 100.0, 1.0, 10_000, compute_seconds=60.0)
    assert "0.129" in table
    assert "1290" in table
    assert "21.5 min" in table
    assert "compute estimate" in table


def test_estimate_zero_payload_is_latency():
    table = estimate_table(0, 100.0, 1.0, 1)
    assert "0.001 s" in table


def test_cli_estimate():
    assert bench_main(["--estimate", "--doubles", "200000", "--mbps", "100",
                       "--latency-ms", "1", "--iters", "10000"]) == 0


def test_cli_runs_scenario(tmp_path, capsys):
    scenario = tmp_path / "t.cfg"
    scenario.write_text(
        "[grid]\nwidth = 10\nheight = 10\nnorth = 4\n"
        "[workers]\ncount = 2\n"
        "[run]\nforced_iterations = 15\nclock = wall\n"
    )
    rc = bench_main([str(scenario), "--mode", "both", "--reps", "1",
                     "--no-warmup", "--out", str(tmp_path / "r.jsonl")])
    assert rc == 0
    out = capsys.readouterr().out
    assert "sync" in out and "async" in out
    assert (tmp_path / "r.jsonl").read_text().count("\n") == 2


def test_cli_check_failure_exit_code(tmp_path):
    scenario = tmp_path / "t.cfg"
    scenario.write_text(
        "[grid]\nwidth = 10\nheight = 10\nnorth = 4\n"
        "[workers]\ncount = 2\n"
        "[run]\nforced_iterations = 15\nclock = wall\n"
        "[check]\nmax_total_wall = 0.000000001\n"
    )
    assert bench_main([str(scenario), "--no-warmup", "--check"]) == 4


def test_cli_parse_error_exit_code(tmp_path):
    scenario = tmp_path / "bad.cfg"
    scenario.write_text("[grid]\nwidth = banana\n")
    assert bench_main([str(scenario)]) == 2


def test_cli_engine_abort_exit_code(tmp_path):
    # total loss stalls sync; the abort surfaces as a nonzero exit
    scenario = tmp_path / "stall.cfg"
    scenario.write_text(
        "[grid]\nwidth = 8\nheight = 8\n"
        "[workers]\ncount = 2\n"
        "[link]\nloss = 1.0\n"
        "[run]\nmode = sync\nforced_iterations = 5\nstall_timeout = 0.2\n"
    )
    assert bench_main([str(scenario), "--no-warmup"]) == 3
