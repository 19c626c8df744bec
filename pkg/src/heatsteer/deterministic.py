"""Deterministic virtual-clock driver.

Replays the same sync/async protocols as the threaded engine, but as a
single-threaded discrete-event loop over simulated time.  Event order is
(time, sequence number), all randomness comes from per-link seeded RNGs,
and a sweep costs a fixed amount of virtual time, so runs with equal
seeds produce identical message traces and iteration-count vectors.
Nothing here sleeps; hundred-repetition property suites finish in
milliseconds.
"""

from __future__ import annotations

import heapq

from .clocks import VirtualClock
from .config import IterationMode, RunConfig
from .engine import (
    RunResult,
    WorkerStats,
    build_problem,
    finalize_result,
    halo_link,
    open_links,
    poll_halos,
    refresh_halos_direct,
    report_link,
    send_halos,
)
from .errors import SyncStallError
from .field import assemble_field
from .monitor import ConvergenceMonitor, Phase, ResidualReport
from .transport import SimulatedTransport


def run_virtual(config: RunConfig) -> RunResult:
    config.validate()
    if config.mode is IterationMode.SYNC:
        return _run_sync(config)
    return _run_async(config)


def _make_world(config: RunConfig, latest_only: bool):
    clock = VirtualClock()
    transport = SimulatedTransport(clock, record_trace=config.record_trace)
    field, sources, subs = build_problem(config)
    open_links(transport, config, subs, latest_only=latest_only)
    monitor = (
        ConvergenceMonitor([s.owner_id for s in subs], config.tolerance)
        if config.monitor_enabled()
        else None
    )
    stats = [WorkerStats(worker=s.owner_id) for s in subs]
    return clock, transport, field, sources, subs, monitor, stats


def _run_sync(config: RunConfig) -> RunResult:
    clock, transport, field, sources, subs, monitor, stats = _make_world(
        config, latest_only=False
    )
    n = len(subs)
    dur = config.virtual_sweep_time
    delays = [config.delays.get(s.owner_id, 0.0) for s in subs]
    limit = config.iteration_limit()
    trajectory = [] if config.record_trajectory else None

    round_start = 0.0
    rnd = 0
    stop = False
    while not stop and rnd < limit:
        rnd += 1
        for sub in subs:
            if sub.has_north_neighbor:
                assert sub.north_tag == sub.iteration, "stale north halo in sync sweep"
            if sub.has_south_neighbor:
                assert sub.south_tag == sub.iteration, "stale south halo in sync sweep"
        residuals = {}
        for sub in subs:
            residuals[sub.owner_id] = sub.sweep()
        # all sweeps take the same virtual duration; sends happen at their end
        send_time = round_start + dur
        clock.advance_to(send_time)
        finish = []
        for i, sub in enumerate(subs):
            send_halos(transport, sub)
            transport.send(
                report_link(sub.owner_id),
                ResidualReport(sub.owner_id, residuals[sub.owner_id], sub.iteration),
            )
            stats[i].comm_time += delays[i]
            finish.append(send_time + delays[i])
        barrier_floor = max(finish)

        # every worker must receive its round-k strips; a lost one stalls
        arrivals = [finish[i] for i in range(n)]
        for i, sub in enumerate(subs):
            wid = sub.owner_id
            for nbr, side in ((wid - 1, "north"), (wid + 1, "south")):
                if not (1 <= nbr <= n):
                    continue
                t_arr = transport.head_delivery(halo_link(nbr, wid))
                if t_arr is None:
                    raise SyncStallError(
                        f"synchronous run stalled: worker {wid}'s iteration-{rnd} "
                        f"{side} halo from worker {nbr} was never delivered; "
                        f"synchronous iterations cannot progress past a lost message"
                    )
                arrivals[i] = max(arrivals[i], t_arr)
            stats[i].halo_wait_time += max(0.0, arrivals[i] - finish[i])

        round_end = max(barrier_floor, max(arrivals))
        clock.advance_to(round_end)
        for i, sub in enumerate(subs):
            poll_halos(transport, sub)
            stats[i].wait_time += round_end - arrivals[i]
        if trajectory is not None:
            trajectory.append(assemble_field(field, subs).values)
        if monitor is not None:
            batch = {}
            for sub in subs:
                for rep in transport.poll_all(report_link(sub.owner_id)):
                    batch[rep.worker] = rep.residual
            if monitor.submit_comparable_batch(batch, rnd) is Phase.CONVERGED:
                stop = True
        round_start = round_end

    total = clock.now()
    for s in stats:
        s.wall_time = total
    return finalize_result(
        IterationMode.SYNC, config, field, sources, subs, stats, monitor, total,
        trajectory=trajectory,
        trace=transport.trace if config.record_trace else None,
    )


def _run_async(config: RunConfig) -> RunResult:
    clock, transport, field, sources, subs, monitor, stats = _make_world(
        config, latest_only=True
    )
    n = len(subs)
    dur = config.virtual_sweep_time
    delays = [config.delays.get(s.owner_id, 0.0) for s in subs]
    limit = config.iteration_limit()
    trajectory = [] if (config.record_trajectory and n == 1) else None

    heap: list[tuple] = []
    seq = 0

    def push(t: float, kind: str, i: int) -> None:
        nonlocal seq
        seq += 1
        heapq.heappush(heap, (t, seq, kind, i))

    done = [False] * n
    parked: dict[int, float] = {}
    verify_seen = [0] * n
    pending_residual = [0.0] * n
    wall = [0.0] * n
    active = n
    stop = False

    def retire(i: int, t: float) -> None:
        nonlocal active
        done[i] = True
        active -= 1
        wall[i] = t
        if monitor is not None and active > 0:
            monitor.suspend_detection()

    def run_verification_pass(t_quiesced: float) -> None:
        """All active workers are parked; decide convergence exactly."""
        nonlocal stop
        assert monitor is not None
        epoch = monitor.pending_verification()
        if epoch is None:
            _resume_parked(t_quiesced)
            return
        monitor.begin_verification(epoch)
        refresh_halos_direct(subs)
        order = sorted(parked)
        residuals = {}
        for i in order:
            stats[i].wait_time += t_quiesced - parked[i]
            residuals[i] = subs[i].sweep()
            verify_seen[i] = epoch
        t_end = t_quiesced + dur
        clock.advance_to(t_end)
        for i in order:
            send_halos(transport, subs[i])
            monitor.submit(
                ResidualReport(
                    subs[i].owner_id, residuals[i], subs[i].iteration,
                    verify_epoch=epoch,
                )
            )
        try:
            phase = monitor.complete_verification(epoch)
        except ValueError:
            monitor.abandon_verification(epoch)
            phase = monitor.phase
        if trajectory is not None:
            trajectory.append(assemble_field(field, subs).values.copy())
        if phase is Phase.CONVERGED:
            stop = True
            for i in order:
                wall[i] = t_end
            parked.clear()
        else:
            _resume_parked(t_end)

    def _resume_parked(t: float) -> None:
        for i in sorted(parked):
            stats[i].comm_time += delays[i]
            push(t + delays[i], "start", i)
        parked.clear()

    for i in range(n):
        push(0.0, "start", i)

    while heap and not stop:
        t, _, kind, i = heapq.heappop(heap)
        if done[i]:
            continue
        clock.advance_to(t)
        if kind == "start":
            if monitor is not None:
                epoch = monitor.pending_verification()
                if epoch is not None and epoch > verify_seen[i]:
                    parked[i] = t
                    if len(parked) == active:
                        run_verification_pass(t)
                    continue
            if subs[i].iteration >= limit:
                retire(i, t)
                if active == 0:
                    break
                if parked and len(parked) == active:
                    run_verification_pass(t)
                continue
            poll_halos(transport, subs[i])
            pending_residual[i] = subs[i].sweep()
            if trajectory is not None:
                trajectory.append(assemble_field(field, subs).values.copy())
            push(t + dur, "finish", i)
        else:  # finish
            send_halos(transport, subs[i])
            if monitor is not None:
                lid = report_link(subs[i].owner_id)
                transport.send(
                    lid,
                    ResidualReport(
                        subs[i].owner_id, pending_residual[i], subs[i].iteration
                    ),
                )
                for rep in transport.poll_all(lid):
                    monitor.submit(rep)
            stats[i].comm_time += delays[i]
            push(t + delays[i], "start", i)

    total = clock.now()
    for i in range(n):
        if not done[i] and wall[i] == 0.0:
            wall[i] = total
    for i, s in enumerate(stats):
        s.wall_time = wall[i]
    return finalize_result(
        IterationMode.ASYNC, config, field, sources, subs, stats, monitor, total,
        trajectory=trajectory,
        trace=transport.trace if config.record_trace else None,
    )
