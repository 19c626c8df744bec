"""Interactive distributed 2D heat-diffusion solver.

A partitioned Jacobi relaxation engine that runs under synchronous or
asynchronous iteration scheduling, measures what communication delays do
to each mode, and can be steered live (boundary and source edits, mode
switches, restarts) over a socket protocol.
"""

from .config import IterationMode, RunConfig
from .engine import (
    HaloMessage,
    RunResult,
    ThreadedEngine,
    WorkerStats,
    run,
    run_async,
    run_sync,
)
from .errors import (
    FrameError,
    HeatsteerError,
    LinkDownError,
    MonitorSoundnessError,
    NonFiniteFieldError,
    PartitionError,
    ScenarioError,
    SyncStallError,
)
from .field import (
    ScalarField2D,
    SourceTerm,
    Subdomain,
    assemble_field,
    global_residual,
    partition,
    sequential_sweep,
    split_field,
)
from .monitor import ConvergenceMonitor, Phase, ResidualReport
from .protocol import downsample, make_snapshot
from .scenario import parse_scenario, parse_scenario_text
from .transport import LinkModel, SimulatedTransport, transfer_time

__version__ = "0.1.0"

__all__ = [
    "ConvergenceMonitor",
    "FrameError",
    "HaloMessage",
    "HeatsteerError",
    "IterationMode",
    "LinkDownError",
    "LinkModel",
    "MonitorSoundnessError",
    "NonFiniteFieldError",
    "PartitionError",
    "Phase",
    "ResidualReport",
    "RunConfig",
    "RunResult",
    "ScalarField2D",
    "ScenarioError",
    "SimulatedTransport",
    "SourceTerm",
    "Subdomain",
    "SyncStallError",
    "ThreadedEngine",
    "WorkerStats",
    "assemble_field",
    "downsample",
    "global_residual",
    "make_snapshot",
    "parse_scenario",
    "parse_scenario_text",
    "partition",
    "run",
    "run_async",
    "run_sync",
    "sequential_sweep",
    "split_field",
    "transfer_time",
]
