"""Wall and virtual clocks.

Timing experiments run against the real monotonic clock; property tests
run against a virtual clock advanced explicitly by a deterministic driver.
Both expose now()/sleep() so the transport does not care which one it got.
"""

from __future__ import annotations

import time


class WallClock:
    def now(self) -> float:
        return time.monotonic()

    def sleep(self, seconds: float) -> None:
        if seconds > 0:
            time.sleep(seconds)


class VirtualClock:
    """Simulated time; only moves when a driver advances it."""

    def __init__(self, start: float = 0.0):
        self._now = float(start)

    def now(self) -> float:
        return self._now

    def advance(self, seconds: float) -> float:
        if seconds < 0:
            raise ValueError("cannot advance a clock backwards")
        self._now += seconds
        return self._now

    def advance_to(self, t: float) -> float:
        if t < self._now:
            raise ValueError(
                f"cannot move virtual clock from {self._now} back to {t}"
            )
        self._now = t
        return self._now

    def sleep(self, seconds: float) -> None:
        # Sleeping in virtual time is a driver bug: the event loop owns time.
        raise RuntimeError("virtual clock cannot sleep; advance it instead")
