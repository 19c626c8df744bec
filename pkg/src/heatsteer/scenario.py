"""Scenario files: flat key-value text with sections.

Grammar (one directive per line):

    # comment (also ;), blank lines ignored
    [section]                  -- grid | sources | workers | delays | link |
                                  run | server | check
    key = value

Sections and keys:

    [grid]     width, height, north, south, east, west, interior
    [sources]  <any name> = x, y, value        (one pinned cell per line)
    [workers]  count, skew (= "equal" or comma-separated positive weights)
    [delays]   worker_<id> = seconds           (per-iteration injected delay)
    [link]     latency, bandwidth (bytes/s), mbps (alternative to bandwidth),
               jitter, loss, seed
    [run]      mode (sync|async), tolerance, max_iterations,
               forced_iterations, clock (wall|virtual), seed,
               virtual_sweep_time, stall_timeout
    [server]   snapshot_period, downsample, byte_budget
    [check]    sync_min_worker_wall, async_max_undelayed_wall,
               async_max_ratio, async_total_le_sync, max_total_wall

Anything else is an error, reported with its file and line number.
"""

from __future__ import annotations

from pathlib import Path

from .config import IterationMode, RunConfig
from .errors import ScenarioError
from .transport import MBPS, LinkModel

_SECTIONS = (
    "grid", "sources", "workers", "delays", "link", "run", "server", "check",
)

_CHECK_KEYS = (
    "sync_min_worker_wall",
    "async_max_undelayed_wall",
    "async_max_ratio",
    "async_total_le_sync",
    "max_total_wall",
)


def parse_scenario(path) -> tuple[RunConfig, dict]:
    """Parse a scenario file into a RunConfig plus its [check] thresholds."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ScenarioError(f"{path}: cannot read scenario: {e}") from e
    return parse_scenario_text(text, name=str(path))


def parse_scenario_text(text: str, name: str = "<scenario>") -> tuple[RunConfig, dict]:
    grid: dict = {}
    sources: list[tuple[int, int, float]] = []
    workers: dict = {}
    delays: dict[int, float] = {}
    link: dict = {}
    run: dict = {}
    server: dict = {}
    checks: dict = {}

    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#") or line.startswith(";"):
            continue
        where = f"{name}:{lineno}"
        if line.startswith("["):
            if not line.endswith("]"):
                raise ScenarioError(f"{where}: unterminated section header {line!r}")
            section = line[1:-1].strip().lower()
            if section not in _SECTIONS:
                raise ScenarioError(
                    f"{where}: unknown section [{section}]; expected one of "
                    f"{', '.join(_SECTIONS)}"
                )
            continue
        if "=" not in line:
            raise ScenarioError(f"{where}: expected 'key = value', got {line!r}")
        if section is None:
            raise ScenarioError(f"{where}: directive before any [section]")
        key, _, value = line.partition("=")
        key = key.strip().lower()
        value = value.split("#", 1)[0].strip()
        try:
            _apply(section, key, value, where,
                   grid, sources, workers, delays, link, run, server, checks)
        except ScenarioError:
            raise
        except ValueError as e:
            raise ScenarioError(f"{where}: {e}") from e

    config = _build_config(grid, sources, workers, delays, link, run, server)
    try:
        config.validate()
    except ValueError as e:
        raise ScenarioError(f"{name}: {e}") from e
    return config, checks


def _apply(section, key, value, where,
           grid, sources, workers, delays, link, run, server, checks):
    if section == "grid":
        if key in ("width", "height"):
            grid[key] = _parse_int(value)
        elif key in ("north", "south", "east", "west", "interior"):
            grid[key] = float(value)
        else:
            raise ScenarioError(f"{where}: unknown [grid] key {key!r}")
    elif section == "sources":
        parts = [p.strip() for p in value.split(",")]
        if len(parts) != 3:
            raise ScenarioError(
                f"{where}: a source is 'name = x, y, value', got {value!r}"
            )
        sources.append((_parse_int(parts[0]), _parse_int(parts[1]), float(parts[2])))
    elif section == "workers":
        if key == "count":
            workers["count"] = _parse_int(value)
        elif key == "skew":
            if value.lower() == "equal":
                workers["skew"] = None
            else:
                workers["skew"] = [float(p) for p in value.split(",")]
        else:
            raise ScenarioError(f"{where}: unknown [workers] key {key!r}")
    elif section == "delays":
        if not key.startswith("worker_"):
            raise ScenarioError(
                f"{where}: delay keys look like worker_<id>, got {key!r}"
            )
        wid = _parse_int(key[len("worker_"):])
        d = float(value)
        if d < 0:
            raise ScenarioError(f"{where}: delay must be >= 0, got {d}")
        delays[wid] = d
    elif section == "link":
        if key == "latency":
            link["latency"] = float(value)
        elif key == "bandwidth":
            link["bandwidth"] = float(value)
        elif key == "mbps":
            link["bandwidth"] = float(value) * MBPS
        elif key == "jitter":
            link["jitter"] = float(value)
        elif key == "loss":
            link["loss_probability"] = float(value)
        elif key == "seed":
            link["seed"] = _parse_int(value)
        else:
            raise ScenarioError(f"{where}: unknown [link] key {key!r}")
    elif section == "run":
        if key == "mode":
            run["mode"] = IterationMode.parse(value)
        elif key == "tolerance":
            run["tolerance"] = float(value)
        elif key == "max_iterations":
            run["max_iterations"] = _parse_int(value)
        elif key == "forced_iterations":
            run["forced_iterations"] = _parse_int(value)
        elif key == "clock":
            if value not in ("wall", "virtual"):
                raise ScenarioError(f"{where}: clock is 'wall' or 'virtual'")
            run["clock"] = value
        elif key == "seed":
            run["seed"] = _parse_int(value)
        elif key == "virtual_sweep_time":
            run["virtual_sweep_time"] = float(value)
        elif key == "stall_timeout":
            run["stall_timeout"] = float(value)
        else:
            raise ScenarioError(f"{where}: unknown [run] key {key!r}")
    elif section == "server":
        if key == "snapshot_period":
            server["snapshot_period"] = float(value)
        elif key == "downsample":
            server["downsample"] = _parse_int(value)
        elif key == "byte_budget":
            server["byte_budget"] = _parse_int(value)
        else:
            raise ScenarioError(f"{where}: unknown [server] key {key!r}")
    elif section == "check":
        if key not in _CHECK_KEYS:
            raise ScenarioError(f"{where}: unknown [check] key {key!r}")
        if key == "async_total_le_sync":
            checks[key] = value.lower() in ("true", "yes", "1")
        else:
            checks[key] = float(value)


def _parse_int(value: str) -> int:
    v = value.strip()
    try:
        return int(v)
    except ValueError:
        raise ValueError(f"expected an integer, got {v!r}")


def _build_config(grid, sources, workers, delays, link, run, server) -> RunConfig:
    kwargs = {}
    kwargs.update(grid)
    if sources:
        kwargs["sources"] = sources
    if "count" in workers:
        kwargs["workers"] = workers["count"]
    if "skew" in workers:
        kwargs["skew"] = workers["skew"]
    if delays:
        kwargs["delays"] = delays
    if link:
        kwargs["link"] = LinkModel(**link)
    kwargs.update(run)
    kwargs.update(server)
    return RunConfig(**kwargs)
