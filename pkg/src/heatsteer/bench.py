"""Benchmark harness: run scenarios, time workers, write reports.

A report is one structured JSON record per run (the same encoding family
as the wire protocol) plus an aligned text table for humans.  Timing uses
the monotonic clock and is reported per worker from its own start/stop; a
warm-up repetition is run and discarded by default so JIT compilation and
allocator noise stay out of the numbers.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass

from .config import IterationMode, RunConfig
from .engine import RunResult, run as run_engine
from .transport import MBPS, LinkModel, transfer_time


@dataclass
class TimingReport:
    scenario: str
    mode: str
    rep: int
    total_wall: float
    converged: bool
    verified_residual: float | None
    config_hash: str
    timestamp: float
    workers: list[dict]

    @classmethod
    def from_result(
        cls, scenario: str, config: RunConfig, result: RunResult, rep: int
    ) -> "TimingReport":
        return cls(
            scenario=scenario,
            mode=result.mode.value,
            rep=rep,
            total_wall=result.total_wall,
            converged=result.converged,
            verified_residual=result.verified_residual,
            config_hash=config.config_hash(),
            timestamp=time.time(),
            workers=[s.to_dict() for s in result.stats],
        )

    def to_record(self) -> dict:
        return {
            "scenario": self.scenario,
            "mode": self.mode,
            "rep": self.rep,
            "total_wall": self.total_wall,
            "converged": self.converged,
            "verified_residual": self.verified_residual,
            "config_hash": self.config_hash,
            "timestamp": self.timestamp,
            "iterations": {str(w["worker"]): w["iterations"] for w in self.workers},
            "workers": self.workers,
        }

    def undelayed_walls(self, config: RunConfig) -> list[float]:
        return [
            w["wall_time"]
            for w in self.workers
            if config.delays.get(w["worker"], 0.0) == 0.0
        ]


def run_scenario(
    config: RunConfig,
    scenario_name: str = "scenario",
    modes=None,
    reps: int = 1,
    warmup: bool = True,
    log=None,
) -> dict[str, list[TimingReport]]:
    """Run a scenario in one or both modes, reps times each.

    Returns mode -> list of reports.  The warm-up repetition is discarded.
    """
    if reps < 1:
        raise ValueError("repetitions must be >= 1")
    if modes is None:
        modes = [config.mode]
    out: dict[str, list[TimingReport]] = {}
    for mode in modes:
        mode = IterationMode.parse(mode)
        cfg = config.with_mode(mode)
        reports = []
        runs = ([None] if warmup else []) + list(range(1, reps + 1))
        for rep in runs:
            result = run_engine(cfg)
            if rep is None:
                if log:
                    log(f"{scenario_name} [{mode.value}] warm-up discarded "
                        f"({result.total_wall:.2f}s)")
                continue
            report = TimingReport.from_result(scenario_name, cfg, result, rep)
            reports.append(report)
            if log:
                log(f"{scenario_name} [{mode.value}] rep {rep}: "
                    f"total {report.total_wall:.2f}s, "
                    f"converged={report.converged}")
        out[mode.value] = reports
    return out


def write_reports(reports: dict[str, list[TimingReport]], path) -> None:
    with open(path, "a") as f:
        for mode_reports in reports.values():
            for r in mode_reports:
                f.write(json.dumps(r.to_record(), allow_nan=False) + "\n")


def format_table(reports: dict[str, list[TimingReport]]) -> str:
    """Aligned per-worker table across all runs."""
    lines = []
    header = (
        f"{'mode':<6} {'rep':>3} {'worker':>6} {'iters':>8} {'wall(s)':>9} "
        f"{'wait(s)':>9} {'halo(s)':>9} {'comm(s)':>9}"
    )
    for mode, mode_reports in reports.items():
        for r in mode_reports:
            lines.append(header)
            for w in r.workers:
                lines.append(
                    f"{mode:<6} {r.rep:>3} {w['worker']:>6} {w['iterations']:>8} "
                    f"{w['wall_time']:>9.3f} {w['wait_time']:>9.3f} "
                    f"{w['halo_wait_time']:>9.3f} {w['comm_time']:>9.3f}"
                )
            resid = r.verified_residual
            lines.append(
                f"{mode:<6} {r.rep:>3}  total {r.total_wall:.3f}s  "
                f"converged={r.converged}  residual={resid:.3e}"
                if resid is not None
                else f"{mode:<6} {r.rep:>3}  total {r.total_wall:.3f}s"
            )
            lines.append("")
    return "\n".join(lines)


def summarize(reports: dict[str, list[TimingReport]]) -> str:
    lines = []
    for mode, mode_reports in reports.items():
        totals = [r.total_wall for r in mode_reports]
        if not totals:
            continue
        lines.append(
            f"{mode}: runs={len(totals)} "
            f"min={min(totals):.2f}s mean={sum(totals) / len(totals):.2f}s "
            f"max={max(totals):.2f}s"
        )
    return "\n".join(lines)


def check_thresholds(
    reports: dict[str, list[TimingReport]], checks: dict, config: RunConfig
) -> list[str]:
    """Evaluate [check] thresholds from the scenario; returns violations."""
    violations = []
    sync_reports = reports.get("sync", [])
    async_reports = reports.get("async", [])

    if "sync_min_worker_wall" in checks:
        bound = checks["sync_min_worker_wall"]
        for r in sync_reports:
            low = min(w["wall_time"] for w in r.workers)
            if low < bound:
                violations.append(
                    f"sync rep {r.rep}: worker wall {low:.2f}s < required {bound}s"
                )
    if "async_max_undelayed_wall" in checks:
        bound = checks["async_max_undelayed_wall"]
        for r in async_reports:
            walls = r.undelayed_walls(config)
            if walls and max(walls) > bound:
                violations.append(
                    f"async rep {r.rep}: undelayed worker wall "
                    f"{max(walls):.2f}s > allowed {bound}s"
                )
    if "async_max_ratio" in checks and sync_reports and async_reports:
        bound = checks["async_max_ratio"]
        sync_mean = sum(r.total_wall for r in sync_reports) / len(sync_reports)
        for r in async_reports:
            walls = r.undelayed_walls(config)
            if walls and max(walls) > bound * sync_mean:
                violations.append(
                    f"async rep {r.rep}: undelayed wall {max(walls):.2f}s > "
                    f"{bound:.0%} of sync mean {sync_mean:.2f}s"
                )
    if checks.get("async_total_le_sync") and sync_reports and async_reports:
        sync_mean = sum(r.total_wall for r in sync_reports) / len(sync_reports)
        async_mean = sum(r.total_wall for r in async_reports) / len(async_reports)
        if async_mean > sync_mean:
            violations.append(
                f"async mean total {async_mean:.2f}s > sync mean {sync_mean:.2f}s"
            )
    if "max_total_wall" in checks:
        bound = checks["max_total_wall"]
        for mode_reports in reports.values():
            for r in mode_reports:
                if r.total_wall > bound:
                    violations.append(
                        f"{r.mode} rep {r.rep}: total {r.total_wall:.2f}s > {bound}s"
                    )
    return violations


def estimate_table(
    doubles: int,
    mbps: float,
    latency_ms: float,
    iters: int,
    compute_seconds: float | None = None,
) -> str:
    """Analytic communication-cost table for shipping a mesh every iteration."""
    link = LinkModel(latency=latency_ms / 1000.0, bandwidth=mbps * MBPS)
    payload = doubles * 8
    per = transfer_time(payload, link)
    total = per * iters
    lines = [
        f"payload:            {doubles} doubles ({payload:,} bytes)",
        f"link:               {mbps:g} Mbps, latency {latency_ms:g} ms",
        f"per-transfer time:  {per:.6g} s",
        f"transfers:          {iters}",
        f"total transfer:     {total:.6g} s ({total / 60:.1f} min)",
    ]
    if compute_seconds is not None:
        lines.append(f"compute estimate:   {compute_seconds:g} s")
        if compute_seconds > 0:
            lines.append(f"transfer/compute:   {total / compute_seconds:.1f}x")
    return "\n".join(lines)
