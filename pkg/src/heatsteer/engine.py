"""Worker scheduling: synchronous and asynchronous iteration drivers.

Each worker owns one Subdomain exclusively and exchanges halo strips and
residual reports through the transport; nothing else is shared.  Two
drivers exist:

* ThreadedEngine runs each worker on its own thread against the wall
  clock.  This is what the timing experiments and the steering server
  use: a worker that sleeps (injected communication delay) really does
  hold up a synchronous barrier and really does not hold up anyone in
  asynchronous mode.
* The deterministic virtual-clock driver lives in ``deterministic.py``
  and replays the same protocol as a single-threaded event loop, which is
  what makes seeded runs exactly reproducible.

SYNC mode: every iteration ends in a rendezvous; a worker may only sweep
iteration k once both its halo strips carry sender iteration k-1.  A
message the transport never delivers therefore stalls the run, which is
reported as a SyncStallError rather than a hang.

ASYNC mode: the sweep loop never blocks on a receive.  Each sweep uses
whatever strips have arrived (latest write wins); halo-receive wait time
is zero by construction.  Convergence is decided by the two-phase
monitor; the verification pass briefly quiesces the workers, refreshes
halos from the frozen neighbor rows, and re-sweeps so the decision is
made against an exact global residual.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass

import numpy as np

from .clocks import WallClock
from .config import IterationMode, RunConfig
from .errors import MonitorSoundnessError, SyncStallError
from .field import (
    ScalarField2D,
    SourceTerm,
    Subdomain,
    assemble_field,
    partition,
    sequential_sweep,
    split_field,
)
from .monitor import ConvergenceMonitor, Phase, ResidualReport
from .transport import LinkModel, SimulatedTransport


@dataclass
class HaloMessage:
    """One atomically delivered strip of boundary-adjacent values.

    The sender iteration is carried twice (head and tail); a mismatch on
    read would mean a torn strip, which the transport must never produce.
    """

    sender: int
    direction: str  # "north" = toward lower worker ids, "south" = higher
    strip: np.ndarray
    sender_iteration: int
    tail_iteration: int

    def verify(self) -> None:
        assert self.sender_iteration == self.tail_iteration, (
            f"torn halo strip from worker {self.sender}: head tag "
            f"{self.sender_iteration} != tail tag {self.tail_iteration}"
        )


@dataclass
class WorkerStats:
    worker: int
    iterations: int = 0
    wall_time: float = 0.0
    wait_time: float = 0.0  # barriers and verification rendezvous
    halo_wait_time: float = 0.0  # blocking waits for halo receipt (sync only)
    comm_time: float = 0.0  # sends plus injected per-iteration delays

    def to_dict(self) -> dict:
        return {
            "worker": self.worker,
            "iterations": self.iterations,
            "wall_time": self.wall_time,
            "wait_time": self.wait_time,
            "halo_wait_time": self.halo_wait_time,
            "comm_time": self.comm_time,
        }


@dataclass
class RunResult:
    mode: IterationMode
    field: ScalarField2D
    stats: list[WorkerStats]
    converged: bool
    verified_residual: float | None
    total_wall: float
    phase: Phase | None = None
    trajectory: list[np.ndarray] | None = None
    trace: list[tuple] | None = None

    @property
    def iterations(self) -> dict[int, int]:
        return {s.worker: s.iterations for s in self.stats}


# --- shared plumbing ---------------------------------------------------------


def halo_link(sender: int, receiver: int) -> tuple:
    return ("halo", sender, receiver)


def report_link(worker: int) -> tuple:
    return ("report", worker)


def derive_link_seed(config: RunConfig, sender: int, receiver: int) -> int:
    base = config.link.seed if config.link.seed is not None else config.seed
    return base * 1_000_003 + sender * 8191 + receiver * 131


def build_problem(
    config: RunConfig, initial_field: ScalarField2D | None = None
) -> tuple[ScalarField2D, SourceTerm, list[Subdomain]]:
    """Initial state for a run segment.

    A carried-over field contributes only its interior; the boundary ring
    and source pins always come from the config, which is what makes
    steering edits survive a segment restart.
    """
    from .field import apply_sources

    field, sources = config.build_field()
    if initial_field is not None:
        if initial_field.values.shape != field.values.shape:
            raise ValueError("carried-over field has the wrong shape")
        field.values[1:-1, 1:-1] = initial_field.values[1:-1, 1:-1]
        apply_sources(field, sources)
    ranges = partition(config.height, config.workers, config.skew)
    subs = split_field(field, ranges, sources)
    return field, sources, subs


def open_links(
    transport: SimulatedTransport,
    config: RunConfig,
    subs: list[Subdomain],
    latest_only: bool,
) -> None:
    """Halo links between neighbors plus one reliable report link per worker."""
    from dataclasses import replace

    for sub in subs:
        wid = sub.owner_id
        for nbr in (wid - 1, wid + 1):
            if 1 <= nbr <= config.workers:
                model = replace(config.link, seed=derive_link_seed(config, wid, nbr))
                transport.open_link(halo_link(wid, nbr), model, latest_only=latest_only)
        transport.open_link(report_link(wid), LinkModel())


def send_halos(transport: SimulatedTransport, sub: Subdomain) -> None:
    """Publish this worker's edge rows to its neighbors.

    Strips are copied at send time so later sweeps cannot tear them.
    """
    wid = sub.owner_id
    it = sub.iteration
    if sub.has_north_neighbor:
        strip = sub.north_edge_row().copy()
        msg = HaloMessage(wid, "north", strip, it, it)
        transport.send(halo_link(wid, wid - 1), msg, size_bytes=strip.nbytes)
    if sub.has_south_neighbor:
        strip = sub.south_edge_row().copy()
        msg = HaloMessage(wid, "south", strip, it, it)
        transport.send(halo_link(wid, wid + 1), msg, size_bytes=strip.nbytes)


def poll_halos(transport: SimulatedTransport, sub: Subdomain) -> None:
    """Take whatever strips have arrived; never blocks; latest write wins."""
    wid = sub.owner_id
    if sub.has_north_neighbor:
        msgs = transport.poll_all(halo_link(wid - 1, wid))
        if msgs:
            m = msgs[-1]
            m.verify()
            sub.accept_north(m.strip, m.sender_iteration)
    if sub.has_south_neighbor:
        msgs = transport.poll_all(halo_link(wid + 1, wid))
        if msgs:
            m = msgs[-1]
            m.verify()
            sub.accept_south(m.strip, m.sender_iteration)


def refresh_halos_direct(subs: list[Subdomain]) -> None:
    """Copy current neighbor edge rows into every halo, bypassing the links.

    Only legal while all workers are quiesced; used by the verification
    pass so its residuals are computed against the true frozen state.
    """
    for i, sub in enumerate(subs):
        if sub.has_north_neighbor:
            nbr = subs[i - 1]
            sub.accept_north(nbr.south_edge_row().copy(), max(nbr.iteration, sub.north_tag))
        if sub.has_south_neighbor:
            nbr = subs[i + 1]
            sub.accept_south(nbr.north_edge_row().copy(), max(nbr.iteration, sub.south_tag))


def exact_global_residual(field: ScalarField2D, sources: SourceTerm) -> float:
    """True update norm of a frozen field: one reference sweep, L2 of change."""
    _, residual = sequential_sweep(field.values, sources)
    return residual


def finalize_result(
    mode: IterationMode,
    config: RunConfig,
    field: ScalarField2D,
    sources: SourceTerm,
    subs: list[Subdomain],
    stats: list[WorkerStats],
    monitor: ConvergenceMonitor | None,
    total_wall: float,
    trajectory=None,
    trace=None,
) -> RunResult:
    final = assemble_field(field, subs)
    for s, sub in zip(stats, subs):
        s.iterations = sub.iteration
    verified = exact_global_residual(final, sources)
    converged = bool(monitor and monitor.converged())
    if converged and verified > config.tolerance:
        raise MonitorSoundnessError(
            f"monitor declared convergence but the frozen field has global "
            f"residual {verified:.3e} > tolerance {config.tolerance:.3e}"
        )
    return RunResult(
        mode=mode,
        field=final,
        stats=stats,
        converged=converged,
        verified_residual=verified,
        total_wall=total_wall,
        phase=monitor.phase if monitor else None,
        trajectory=trajectory,
        trace=trace,
    )


# --- threaded driver ---------------------------------------------------------

_NORMAL = "normal"
_PAUSED = "paused"
_VERIFYING = "verifying"

_POLL = 0.02  # condition re-check quantum
_HALO_SPIN = 0.0002  # sync halo wait quantum


class _WorkerRt:
    __slots__ = ("sub", "stats", "delay", "limit", "verify_seen", "thread")

    def __init__(self, sub: Subdomain, delay: float, limit: int):
        self.sub = sub
        self.stats = WorkerStats(worker=sub.owner_id)
        self.delay = delay
        self.limit = limit
        self.verify_seen = 0
        self.thread: threading.Thread | None = None


class ThreadedEngine:
    """Wall-clock driver; one thread per worker.

    Also exposes the steering surface used by the server: pause/resume,
    quiesced and live snapshots, and mutations applied at sweep
    boundaries.
    """

    def __init__(
        self,
        config: RunConfig,
        transport: SimulatedTransport | None = None,
        initial_field: ScalarField2D | None = None,
    ):
        config.validate()
        self.config = config
        self.mode = config.mode
        self.clock = WallClock()
        self.field, self.sources, self.subs = build_problem(config, initial_field)
        self.transport = transport or SimulatedTransport(
            self.clock, record_trace=config.record_trace
        )
        open_links(
            self.transport, config, self.subs,
            latest_only=(self.mode is IterationMode.ASYNC),
        )
        self.monitor = (
            ConvergenceMonitor([s.owner_id for s in self.subs], config.tolerance)
            if config.monitor_enabled()
            else None
        )
        limit = config.iteration_limit()
        self.workers = [
            _WorkerRt(sub, config.delays.get(sub.owner_id, 0.0), limit)
            for sub in self.subs
        ]

        self._cond = threading.Condition()
        self._state = _NORMAL
        self._stop = False
        self._stop_requested = False
        self._pause_requested = False
        self._parked = 0
        self._active = len(self.workers)
        self._abort: BaseException | None = None
        self._round = 0
        self._started = False
        self._finished = threading.Event()
        self._result: RunResult | None = None
        self._t_start = 0.0
        self._t_end = 0.0

        n = len(self.workers)
        self._start_barrier = threading.Barrier(n + 1)
        self._iter_barrier = threading.Barrier(n, action=self._sync_round_done)
        self.trajectory: list[np.ndarray] | None = (
            [] if config.record_trajectory else None
        )

        # verification gate state (async only)
        self._vg_epoch = 0
        self._vg_arrived = 0
        self._vg_refreshed = False
        self._vg_swept = 0
        self._vg_decided = False

    # -- lifecycle ------------------------------------------------------------

    def start(self) -> None:
        if self._started:
            raise RuntimeError("engine already started")
        self._started = True
        for w in self.workers:
            t = threading.Thread(
                target=self._worker_main, args=(w,),
                name=f"worker-{w.sub.owner_id}", daemon=True,
            )
            w.thread = t
            t.start()
        self._start_barrier.wait()
        self._t_start = time.monotonic()

    def wait(self, timeout: float | None = None) -> bool:
        return self._finished.wait(timeout)

    @property
    def finished(self) -> bool:
        return self._finished.is_set()

    def result(self) -> RunResult:
        """Block until the run ends; raise the abort cause if it crashed."""
        self._finished.wait()
        for w in self.workers:
            if w.thread is not None:
                w.thread.join()
        if self._abort is not None:
            raise self._abort
        if self._result is None:
            self._result = finalize_result(
                self.mode, self.config, self.field, self.sources, self.subs,
                [w.stats for w in self.workers], self.monitor,
                self._t_end - self._t_start,
                trajectory=self.trajectory,
                trace=self.transport.trace if self.config.record_trace else None,
            )
        return self._result

    def run(self) -> RunResult:
        self.start()
        return self.result()

    def stop(self) -> None:
        """Ask the run to end at the next iteration boundary."""
        with self._cond:
            if self.mode is IterationMode.ASYNC:
                self._stop = True
            self._stop_requested = True
            self._cond.notify_all()

    # -- worker loops ---------------------------------------------------------

    def _worker_main(self, w: _WorkerRt) -> None:
        try:
            self._start_barrier.wait()
            t0 = time.monotonic()
            try:
                if self.mode is IterationMode.SYNC:
                    self._sync_loop(w)
                else:
                    self._async_loop(w)
            finally:
                w.stats.wall_time = time.monotonic() - t0
        except threading.BrokenBarrierError:
            pass  # another worker aborted the run
        except BaseException as e:  # noqa: BLE001 - surfaced via result()
            self._abort_run(e)
        finally:
            self._worker_done(w)

    def _sync_loop(self, w: _WorkerRt) -> None:
        sub = w.sub
        while True:
            if not self._control_point(w):
                break
            if sub.iteration >= w.limit:
                break
            if sub.has_north_neighbor:
                assert sub.north_tag == sub.iteration, "stale north halo in sync sweep"
            if sub.has_south_neighbor:
                assert sub.south_tag == sub.iteration, "stale south halo in sync sweep"
            residual = sub.sweep()
            self._timed_send(w)
            self.transport.send(
                report_link(sub.owner_id),
                ResidualReport(sub.owner_id, residual, sub.iteration),
            )
            self._injected_delay(w)
            self._await_halos_sync(w)
            t0 = time.monotonic()
            self._iter_barrier.wait()
            w.stats.wait_time += time.monotonic() - t0

    def _async_loop(self, w: _WorkerRt) -> None:
        sub = w.sub
        while True:
            if not self._control_point(w):
                break
            if sub.iteration >= w.limit:
                break
            poll_halos(self.transport, sub)
            residual = sub.sweep()
            self._timed_send(w)
            if self.monitor is not None:
                # Each worker reports on its own link and drains it right
                # away, so every report is pumped into the monitor exactly
                # once without touching the other workers' links.
                lid = report_link(sub.owner_id)
                self.transport.send(
                    lid, ResidualReport(sub.owner_id, residual, sub.iteration)
                )
                for rep in self.transport.poll_all(lid):
                    self.monitor.submit(rep)
            self._injected_delay(w)

    # -- control --------------------------------------------------------------

    def _control_point(self, w: _WorkerRt) -> bool:
        """Per-iteration rendezvous: stop, pause and verification checks.

        Returns False when the worker should leave its loop.  In SYNC mode
        every worker passes this point the same number of times, so stop
        and pause latch through the barrier action to keep counts equal.
        """
        # Fast path: plain attribute reads are atomic under the GIL, and
        # every flag checked here is only ever raised (never lowered) while
        # workers are running, so a missed update is caught one sweep later.
        if (
            self._abort is None
            and not self._stop
            and not self._pause_requested
            and self._state == _NORMAL
            and (
                self.monitor is None
                or self.mode is IterationMode.SYNC
                or self.monitor.phase is Phase.RUNNING
            )
        ):
            return True
        c = self._cond
        with c:
            while True:
                if self._abort is not None or self._stop:
                    return False
                parked_state = self._state == _PAUSED or (
                    self.mode is IterationMode.ASYNC and self._pause_requested
                )
                if parked_state and self._state != _VERIFYING:
                    if self._stop_requested:
                        return False
                    self._parked += 1
                    if self._parked == self._active:
                        self._state = _PAUSED
                    c.notify_all()
                    t0 = time.monotonic()
                    c.wait(_POLL)
                    w.stats.wait_time += time.monotonic() - t0
                    self._parked -= 1
                    continue
                if self.mode is IterationMode.ASYNC and self.monitor is not None:
                    epoch = self.monitor.pending_verification()
                    if epoch is not None and epoch > w.verify_seen:
                        self._state = _VERIFYING
                        c.release()
                        try:
                            self._serve_verification(w, epoch)
                        finally:
                            c.acquire()
                        continue
                return True

    def _serve_verification(self, w: _WorkerRt, epoch: int) -> None:
        """Participate in one verification pass (quiesce, refresh, re-sweep)."""
        mon = self.monitor
        assert mon is not None
        mon.begin_verification(epoch)
        w.verify_seen = epoch
        c = self._cond
        with c:
            if self._vg_epoch != epoch:
                self._vg_epoch = epoch
                self._vg_arrived = 0
                self._vg_refreshed = False
                self._vg_swept = 0
                self._vg_decided = False
            self._vg_arrived += 1
            c.notify_all()
            t0 = time.monotonic()
            while (
                self._vg_epoch == epoch
                and self._vg_arrived < self._active
                and not self._vg_refreshed
                and self._abort is None
                and not self._stop
            ):
                c.wait(_POLL)
            if self._abort is not None or self._stop or self._vg_epoch != epoch:
                w.stats.wait_time += time.monotonic() - t0
                return
            if not self._vg_refreshed:
                # last to arrive: every worker is quiesced, refresh all halos
                refresh_halos_direct(self.subs)
                self._vg_refreshed = True
                c.notify_all()
            w.stats.wait_time += time.monotonic() - t0
        residual = w.sub.sweep()
        self._timed_send(w)
        mon.submit(
            ResidualReport(w.sub.owner_id, residual, w.sub.iteration, verify_epoch=epoch)
        )
        with c:
            if self._vg_epoch != epoch:
                return  # pass superseded while we swept; rejoin at the next one
            self._vg_swept += 1
            c.notify_all()
            t0 = time.monotonic()
            while (
                self._vg_epoch == epoch
                and self._vg_swept < self._active
                and not self._vg_decided
                and self._abort is None
                and not self._stop
            ):
                c.wait(_POLL)
            if self._vg_epoch == epoch and not self._vg_decided and self._abort is None:
                self._vg_decided = True
                try:
                    phase = mon.complete_verification(epoch)
                except ValueError:
                    mon.abandon_verification(epoch)
                    phase = mon.phase
                if phase is Phase.CONVERGED:
                    self._stop = True
                if self._state == _VERIFYING:
                    self._state = _NORMAL
                c.notify_all()
            w.stats.wait_time += time.monotonic() - t0
        if not self._stop and self._abort is None:
            self._injected_delay(w)  # the verification sweep is still a sweep

    def _sync_round_done(self) -> None:
        """Barrier action; runs in exactly one thread between rounds."""
        self._round += 1
        if self.trajectory is not None:
            self.trajectory.append(assemble_field(self.field, self.subs).values)
        if self.monitor is not None:
            batch: dict[int, float] = {}
            for sub in self.subs:
                for rep in self.transport.poll_all(report_link(sub.owner_id)):
                    batch[rep.worker] = rep.residual
            if len(batch) == len(self.subs):
                phase = self.monitor.submit_comparable_batch(batch, self._round)
                if phase is Phase.CONVERGED:
                    self._stop = True
        with self._cond:
            if self._stop_requested:
                self._stop = True
            if self._pause_requested:
                self._state = _PAUSED
            self._cond.notify_all()

    def _await_halos_sync(self, w: _WorkerRt) -> None:
        """Block until both neighbor strips for this iteration arrive.

        Sync mode cannot progress past a lost message; after the stall
        timeout the whole run aborts with a diagnosis.
        """
        sub = w.sub
        if not (sub.has_north_neighbor or sub.has_south_neighbor):
            return
        k = sub.iteration
        deadline = time.monotonic() + self.config.stall_timeout
        t0 = time.monotonic()
        waited = False
        while True:
            poll_halos(self.transport, sub)
            n_ok = (not sub.has_north_neighbor) or sub.north_tag >= k
            s_ok = (not sub.has_south_neighbor) or sub.south_tag >= k
            if n_ok and s_ok:
                break
            if self._stop or self._abort is not None:
                break
            if time.monotonic() > deadline:
                missing = "north" if not n_ok else "south"
                nbr = sub.owner_id - 1 if not n_ok else sub.owner_id + 1
                raise SyncStallError(
                    f"synchronous run stalled: worker {sub.owner_id} waited "
                    f"{self.config.stall_timeout:.3g}s for its iteration-{k} "
                    f"{missing} halo from worker {nbr}; synchronous iterations "
                    f"cannot progress past a lost or undelivered message"
                )
            waited = True
            time.sleep(_HALO_SPIN)
        if waited:
            w.stats.halo_wait_time += time.monotonic() - t0

    def _timed_send(self, w: _WorkerRt) -> None:
        t0 = time.monotonic()
        send_halos(self.transport, w.sub)
        w.stats.comm_time += time.monotonic() - t0

    def _injected_delay(self, w: _WorkerRt) -> None:
        if w.delay > 0:
            t0 = time.monotonic()
            self.clock.sleep(w.delay)
            w.stats.comm_time += time.monotonic() - t0

    def _abort_run(self, exc: BaseException) -> None:
        with self._cond:
            if self._abort is None:
                self._abort = exc
            self._stop = True
            self._cond.notify_all()
        self._iter_barrier.abort()

    def _worker_done(self, w: _WorkerRt) -> None:
        with self._cond:
            self._active -= 1
            if (
                self._active > 0
                and not self._stop
                and self._abort is None
                and self.monitor is not None
            ):
                # A retired worker can no longer serve verification passes,
                # so convergence can never be proven for the rest of this run.
                self.monitor.suspend_detection()
            if self._active == 0:
                self._t_end = time.monotonic()
                self._finished.set()
            self._cond.notify_all()

    # -- steering surface -------------------------------------------------------

    def pause(self, timeout: float = 30.0) -> bool:
        """Quiesce every worker at a sweep boundary; True once parked."""
        deadline = time.monotonic() + timeout
        with self._cond:
            self._pause_requested = True
            self._cond.notify_all()
            while not self.finished:
                if self._state == _PAUSED and self._parked == self._active:
                    return True
                if time.monotonic() > deadline:
                    return False
                self._cond.wait(_POLL)
            return True  # a finished engine is trivially quiesced

    def resume(self) -> None:
        with self._cond:
            self._pause_requested = False
            if self._state == _PAUSED:
                self._state = _NORMAL
            self._cond.notify_all()

    def apply_mutation(self, fn) -> None:
        """Run fn against quiesced state; effective before anyone's next sweep."""
        was_paused = self._pause_requested
        self.pause()
        try:
            fn(self)
        finally:
            if not was_paused:
                self.resume()

    def pause_and_snapshot(self) -> tuple[ScalarField2D, dict[int, int]]:
        """Consistent capture: quiesce, assemble, resume."""
        was_paused = self._pause_requested
        self.pause()
        try:
            field = assemble_field(self.field, self.subs)
            counts = {sub.owner_id: sub.iteration for sub in self.subs}
        finally:
            if not was_paused:
                self.resume()
        return field, counts

    def live_snapshot(self) -> tuple[np.ndarray, dict[int, int]]:
        """Non-quiescing capture; rows may mix iterations in ASYNC mode."""
        values = self.field.values.copy()
        for sub in self.subs:
            values[sub.row_start : sub.row_end] = sub.owned()
        counts = {sub.owner_id: sub.iteration for sub in self.subs}
        return values, counts

    def set_boundary(self, edge: str, value: float) -> None:
        def mutate(engine: "ThreadedEngine") -> None:
            engine.field.set_edge(edge, value)
            first, last = engine.subs[0], engine.subs[-1]
            if edge == "north":
                first.local[0, :] = value
            elif edge == "south":
                last.local[-1, :] = value
            elif edge == "west":
                for sub in engine.subs:
                    sub.local[:, 0] = value
            elif edge == "east":
                for sub in engine.subs:
                    sub.local[:, -1] = value

        self.apply_mutation(mutate)

    def set_source(self, x: int, y: int, value: float) -> None:
        def mutate(engine: "ThreadedEngine") -> None:
            engine.sources.set(x, y, value)
            for sub in engine.subs:
                sub.set_sources(engine.sources)

        self.apply_mutation(mutate)

    def clear_source(self, x: int, y: int) -> None:
        def mutate(engine: "ThreadedEngine") -> None:
            engine.sources.clear(x, y)
            for sub in engine.subs:
                sub.set_sources(engine.sources)

        self.apply_mutation(mutate)

    def set_tolerance(self, value: float) -> None:
        def mutate(engine: "ThreadedEngine") -> None:
            if engine.monitor is not None:
                with engine.monitor.lock:
                    engine.monitor.tolerance = float(value)

        self.apply_mutation(mutate)

    def snapshot_residual(self) -> tuple[float | None, str]:
        if self.monitor is None:
            return None, "tentative"
        return self.monitor.current_global()


# --- public entry points ------------------------------------------------------


def run_sync(
    config: RunConfig, transport: SimulatedTransport | None = None
) -> RunResult:
    return _run(config.with_mode(IterationMode.SYNC), transport)


def run_async(
    config: RunConfig, transport: SimulatedTransport | None = None
) -> RunResult:
    return _run(config.with_mode(IterationMode.ASYNC), transport)


def _run(config: RunConfig, transport: SimulatedTransport | None) -> RunResult:
    if config.clock == "virtual":
        from .deterministic import run_virtual

        if transport is not None:
            raise ValueError("virtual runs build their own transport")
        return run_virtual(config)
    return ThreadedEngine(config, transport=transport).run()


def run(config: RunConfig, transport: SimulatedTransport | None = None) -> RunResult:
    return _run(config, transport)
