"""Command-line entry points: the benchmark harness and the steering server."""

from __future__ import annotations

import argparse
import asyncio
import os
import sys

from .bench import (
    check_thresholds,
    estimate_table,
    format_table,
    run_scenario,
    summarize,
    write_reports,
)
from .errors import HeatsteerError
from .scenario import parse_scenario


def bench_main(argv=None) -> int:
    p = argparse.ArgumentParser(
        prog="heatsteer-bench",
        description="Run scenario timing experiments or the analytic "
        "communication-cost estimate.",
    )
    p.add_argument("scenario", nargs="?", help="scenario file path")
    p.add_argument("--mode", choices=["sync", "async", "both"], default=None,
                   help="override the scenario's mode")
    p.add_argument("--reps", type=int, default=1, help="repetitions per mode")
    p.add_argument("--out", help="append JSON records to this file")
    p.add_argument("--no-warmup", action="store_true",
                   help="skip the discarded warm-up repetition")
    p.add_argument("--check", action="store_true",
                   help="evaluate the scenario's [check] thresholds; nonzero "
                   "exit on violation")
    p.add_argument("--estimate", action="store_true",
                   help="print the transfer-time table instead of running")
    p.add_argument("--doubles", type=int, default=200_000)
    p.add_argument("--mbps", type=float, default=100.0)
    p.add_argument("--latency-ms", type=float, default=1.0)
    p.add_argument("--iters", type=int, default=10_000)
    p.add_argument("--compute-seconds", type=float, default=None)
    args = p.parse_args(argv)

    if args.estimate:
        print(estimate_table(args.doubles, args.mbps, args.latency_ms,
                             args.iters, args.compute_seconds))
        return 0
    if not args.scenario:
        p.error("a scenario file is required unless --estimate is given")

    try:
        config, checks = parse_scenario(args.scenario)
    except HeatsteerError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2

    if args.mode == "both":
        modes = ["sync", "async"]
    elif args.mode:
        modes = [args.mode]
    else:
        modes = [config.mode]

    name = os.path.basename(args.scenario)
    try:
        reports = run_scenario(
            config, scenario_name=name, modes=modes, reps=args.reps,
            warmup=not args.no_warmup, log=lambda s: print(s, flush=True),
        )
    except HeatsteerError as e:
        print(f"run aborted: {e}", file=sys.stderr)
        return 3

    print()
    print(format_table(reports))
    print(summarize(reports))
    if args.out:
        write_reports(reports, args.out)
        print(f"records appended to {args.out}")

    if args.check:
        violations = check_thresholds(reports, checks, config)
        if violations:
            print("\nCHECK FAILED:", file=sys.stderr)
            for v in violations:
                print(f"  - {v}", file=sys.stderr)
            return 4
        print("\nall checks passed" if checks else "\nno [check] thresholds defined")
    return 0


def serve_main(argv=None) -> int:
    p = argparse.ArgumentParser(
        prog="heatsteer-serve",
        description="Serve a live, steerable simulation session.",
    )
    p.add_argument("scenario", help="scenario file path")
    p.add_argument("--listen", default=os.environ.get("HEATSTEER_LISTEN",
                                                      "127.0.0.1:8750"),
                   help="host:port for the raw frame socket "
                   "(env HEATSTEER_LISTEN)")
    p.add_argument("--ws", default=os.environ.get("HEATSTEER_WS",
                                                  "127.0.0.1:8751"),
                   help="host:port for the WebSocket endpoint, or 'off' "
                   "(env HEATSTEER_WS)")
    args = p.parse_args(argv)

    try:
        config, _checks = parse_scenario(args.scenario)
    except HeatsteerError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2

    host, port = _parse_addr(args.listen)
    ws_port = None
    if args.ws != "off":
        ws_host, ws_port = _parse_addr(args.ws)
        if ws_host != host:
            print("error: WebSocket endpoint must share the listen host",
                  file=sys.stderr)
            return 2

    async def main() -> None:
        from .server import serve

        server = await serve(config, host=host, port=port, ws_port=ws_port)
        print(f"listening on {server.host}:{server.port}"
              + (f" (ws {server.ws_port})" if server.ws_port else ""),
              flush=True)
        try:
            await server.serve_forever()
        finally:
            await server.stop()

    try:
        asyncio.run(main())
    except KeyboardInterrupt:
        pass
    except OSError as e:
        print(f"error: cannot listen on {args.listen}: {e}", file=sys.stderr)
        return 2
    return 0


def _parse_addr(text: str) -> tuple[str, int]:
    host, _, port = text.rpartition(":")
    return host or "127.0.0.1", int(port)


if __name__ == "__main__":
    sys.exit(bench_main())
