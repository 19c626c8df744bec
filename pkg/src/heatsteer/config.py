"""Scenario configuration shared by the engine, the bench CLI and the server."""

from __future__ import annotations

import enum
import hashlib
import json
import math
from dataclasses import dataclass, field, replace

from .errors import PartitionError
from .transport import LinkModel


class IterationMode(enum.Enum):
    SYNC = "sync"
    ASYNC = "async"

    @classmethod
    def parse(cls, value) -> "IterationMode":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"mode must be 'sync' or 'async', got {value!r}")


DEFAULT_TOLERANCE = 1e-6
DEFAULT_MAX_ITERATIONS = 100_000
SNAPSHOT_BYTE_BUDGET = 256 * 1024
MAX_TILE_EDGE = 200


@dataclass
class RunConfig:
    """Everything needed to run one scenario.

    Worker ids are 1-based, matching how the delayed "communication
    worker" is usually described (worker 1 talks to the visualization
    machine).
    """

    width: int = 200
    height: int = 200
    north: float = 0.0
    south: float = 0.0
    east: float = 0.0
    west: float = 0.0
    interior: float = 0.0
    sources: list[tuple[int, int, float]] = field(default_factory=list)

    workers: int = 1
    skew: list[float] | None = None  # None = equal split

    mode: IterationMode = IterationMode.SYNC
    tolerance: float = DEFAULT_TOLERANCE
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    forced_iterations: int | None = None

    delays: dict[int, float] = field(default_factory=dict)  # worker id -> s
    link: LinkModel = field(default_factory=LinkModel)
    seed: int = 0

    clock: str = "wall"  # "wall" | "virtual"
    virtual_sweep_time: float = 1e-3
    stall_timeout: float = 5.0
    comm_budget: float = 0.10

    snapshot_period: float = 0.5
    downsample: int = 0  # 0 = choose automatically
    byte_budget: int = SNAPSHOT_BYTE_BUDGET

    record_trajectory: bool = False
    record_trace: bool = False

    def __post_init__(self):
        self.mode = IterationMode.parse(self.mode)

    def validate(self) -> None:
        if self.width < 3 or self.height < 3:
            raise ValueError(f"grid must be at least 3x3, got {self.width}x{self.height}")
        if self.workers < 1:
            raise ValueError("need at least one worker")
        if self.height - 2 < self.workers:
            raise PartitionError(
                f"{self.workers} workers need at least {self.workers} interior "
                f"rows; grid height {self.height} has {self.height - 2}"
            )
        if self.skew is not None and len(self.skew) != self.workers:
            raise ValueError("skew list length must equal worker count")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be > 0")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.forced_iterations is not None and self.forced_iterations < 1:
            raise ValueError("forced_iterations must be >= 1")
        for wid, d in self.delays.items():
            if not 1 <= wid <= self.workers:
                raise ValueError(
                    f"injected delay references worker {wid}, but only "
                    f"workers 1..{self.workers} exist"
                )
            if d < 0:
                raise ValueError("injected delays must be >= 0")
        for x, y, _v in self.sources:
            if not (1 <= x <= self.width - 2 and 1 <= y <= self.height - 2):
                raise ValueError(f"source ({x}, {y}) is outside the interior")
        if self.clock not in ("wall", "virtual"):
            raise ValueError("clock must be 'wall' or 'virtual'")
        if self.snapshot_period <= 0:
            raise ValueError("snapshot period must be > 0")
        if self.downsample < 0:
            raise ValueError("downsample factor must be >= 1 (0 = auto)")
        if self.virtual_sweep_time <= 0:
            raise ValueError("virtual_sweep_time must be > 0")

    def iteration_limit(self) -> int:
        return self.forced_iterations if self.forced_iterations else self.max_iterations

    def monitor_enabled(self) -> bool:
        """Forced-iteration runs ignore residuals entirely."""
        return self.forced_iterations is None

    def with_mode(self, mode) -> "RunConfig":
        return replace(self, mode=IterationMode.parse(mode))

    def to_dict(self) -> dict:
        link = self.link
        return {
            "width": self.width,
            "height": self.height,
            "boundary": {
                "north": self.north,
                "south": self.south,
                "east": self.east,
                "west": self.west,
            },
            "interior": self.interior,
            "sources": [list(s) for s in self.sources],
            "workers": self.workers,
            "skew": self.skew,
            "mode": self.mode.value,
            "tolerance": self.tolerance,
            "max_iterations": self.max_iterations,
            "forced_iterations": self.forced_iterations,
            "delays": {str(k): v for k, v in sorted(self.delays.items())},
            "link": {
                "latency": link.latency,
                "bandwidth": None if math.isinf(link.bandwidth) else link.bandwidth,
                "jitter": link.jitter,
                "loss_probability": link.loss_probability,
                "seed": link.seed,
            },
            "seed": self.seed,
            "clock": self.clock,
            "virtual_sweep_time": self.virtual_sweep_time,
            "stall_timeout": self.stall_timeout,
            "snapshot_period": self.snapshot_period,
            "downsample": self.downsample,
            "byte_budget": self.byte_budget,
        }

    def config_hash(self) -> str:
        """Stable digest of the scenario parameters (not of runtime noise)."""
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:12]

    def build_field(self):
        from .field import ScalarField2D, SourceTerm, apply_sources

        f = ScalarField2D.uniform(
            self.width, self.height,
            north=self.north, south=self.south,
            east=self.east, west=self.west,
            interior=self.interior,
        )
        src = SourceTerm([tuple(s) for s in self.sources])
        src.validate(self.width, self.height)
        apply_sources(f, src)
        return f, src
