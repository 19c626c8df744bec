"""Global convergence detection.

Local update norms reported by unsynchronized workers are not mutually
comparable, so a run is never declared converged from them directly.
Instead the monitor runs a two-phase protocol:

* RUNNING -> TENTATIVE once every worker's latest report is at or below
  the tolerance.  This only schedules a verification pass.
* The engine then quiesces the workers, refreshes every halo from the
  frozen neighbor rows, and has each worker perform one more sweep.  The
  combined L2 of those fresh residuals is the exact global update norm of
  the frozen state.
* VERIFYING -> CONVERGED iff that exact norm is within tolerance,
  otherwise back to RUNNING.  CONVERGED is sticky for the run segment.

Synchronous runs produce whole-iteration residual batches that are
already mutually comparable (every halo was fresh), so a comparable batch
whose combined norm is within tolerance is itself a completed
verification pass and converges without an extra sweep.
"""

from __future__ import annotations

import enum
import threading
from dataclasses import dataclass

from .field import global_residual


class Phase(enum.Enum):
    RUNNING = "running"
    TENTATIVE = "tentative"
    VERIFYING = "verifying"
    CONVERGED = "converged"


@dataclass
class ResidualReport:
    worker: int
    residual: float
    iteration: int
    verify_epoch: int | None = None  # None for ordinary per-sweep reports


class ConvergenceMonitor:
    """Tracks per-worker residuals and drives the phase machine.

    Thread-safe; any worker thread may submit reports or pump state.
    """

    def __init__(self, worker_ids, tolerance: float):
        self.worker_ids = frozenset(worker_ids)
        if not self.worker_ids:
            raise ValueError("monitor needs at least one worker")
        self.tolerance = float(tolerance)
        self.phase = Phase.RUNNING
        self.latest: dict[int, tuple[float, int]] = {}
        self.verify_epoch = 0
        self._verify_bucket: dict[int, float] = {}
        self.last_verified: float | None = None
        self._suspended = False
        self.lock = threading.Lock()

    def _check_worker(self, worker: int) -> None:
        if worker not in self.worker_ids:
            raise ValueError(f"report from unknown worker id {worker}")

    def submit(self, report: ResidualReport) -> Phase:
        """Feed one report; returns the phase after processing it."""
        with self.lock:
            self._check_worker(report.worker)
            if report.verify_epoch is not None:
                return self._submit_verify(report)
            self.latest[report.worker] = (report.residual, report.iteration)
            if self.phase is Phase.RUNNING and self._all_below():
                self.phase = Phase.TENTATIVE
                self.verify_epoch += 1
                self._verify_bucket = {}
            return self.phase

    def submit_comparable_batch(self, residuals: dict[int, float], iteration: int) -> Phase:
        """Feed one whole synchronous iteration's residuals.

        All entries come from the same sweep with fresh halos, so their
        combination is the exact global update norm: if it is within
        tolerance this batch is a completed verification pass.
        """
        with self.lock:
            for w in residuals:
                self._check_worker(w)
            if set(residuals) != self.worker_ids:
                raise ValueError("comparable batch must cover every worker")
            for w, r in residuals.items():
                self.latest[w] = (r, iteration)
            if self.phase is Phase.CONVERGED:
                return self.phase
            total = global_residual(residuals.values())
            if total <= self.tolerance:
                self.phase = Phase.CONVERGED
                self.last_verified = total
            return self.phase

    # --- verification pass -------------------------------------------------

    def pending_verification(self) -> int | None:
        """Epoch of the verification pass awaiting service, if any."""
        with self.lock:
            if self.phase in (Phase.TENTATIVE, Phase.VERIFYING):
                return self.verify_epoch
            return None

    def begin_verification(self, epoch: int) -> None:
        with self.lock:
            if self.phase is Phase.TENTATIVE and self.verify_epoch == epoch:
                self.phase = Phase.VERIFYING

    def _submit_verify(self, report: ResidualReport) -> Phase:
        if report.verify_epoch != self.verify_epoch:
            return self.phase  # stale epoch; pass already decided
        self._verify_bucket[report.worker] = report.residual
        self.latest[report.worker] = (report.residual, report.iteration)
        return self.phase

    def complete_verification(self, epoch: int) -> Phase:
        """Decide the pass once every worker's fresh residual is in."""
        with self.lock:
            if self.phase is not Phase.VERIFYING or epoch != self.verify_epoch:
                return self.phase
            if set(self._verify_bucket) != self.worker_ids:
                raise ValueError("verification pass is missing worker reports")
            total = global_residual(self._verify_bucket.values())
            if total <= self.tolerance:
                self.phase = Phase.CONVERGED
                self.last_verified = total
            else:
                self.phase = Phase.RUNNING
            return self.phase

    def abandon_verification(self, epoch: int) -> None:
        """Give up a pass that can no longer complete (workers exhausted)."""
        with self.lock:
            if self.phase is Phase.VERIFYING and epoch == self.verify_epoch:
                self.phase = Phase.RUNNING

    def suspend_detection(self) -> None:
        """Stop scheduling verification passes.

        Called when a worker retires at its iteration cap: a pass needs a
        fresh residual from every worker, so convergence can no longer be
        proven for this run.
        """
        with self.lock:
            self._suspended = True
            if self.phase is Phase.TENTATIVE:
                self.phase = Phase.RUNNING

    # --- queries ------------------------------------------------------------

    def _all_below(self) -> bool:
        if self._suspended or set(self.latest) != self.worker_ids:
            return False
        return all(r <= self.tolerance for r, _ in self.latest.values())

    def converged(self) -> bool:
        return self.phase is Phase.CONVERGED

    def current_global(self) -> tuple[float | None, str]:
        """Latest global residual and whether it is verified or tentative.

        The tentative value combines possibly-stale per-worker reports; it
        is a progress indicator, not a convergence proof.
        """
        with self.lock:
            if self.phase is Phase.CONVERGED and self.last_verified is not None:
                return self.last_verified, "verified"
            if not self.latest:
                return None, "tentative"
            return global_residual(r for r, _ in self.latest.values()), "tentative"
