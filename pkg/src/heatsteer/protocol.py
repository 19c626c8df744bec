"""Steering wire protocol: frame payloads, snapshots, and downsampling.

Payloads are JSON objects with a "type" field, carried either inside the
length-prefixed frames of the raw stream socket (see transport.py) or as
single WebSocket text messages.  Frame types:

* HELLO    {segment, config}                      server -> client, once
* SNAPSHOT {segment, mode, iterations, residual, residual_kind, live,
            tile, tile_width, tile_height, factor, width, height,
            timestamp}                            server -> client, periodic
* COMMAND  {id, command: {op, ...}}               client -> server
* ACK      {id}                                   server -> client
* REJECT   {id, reason}                           server -> client

Field tiles are flat row-major arrays of scalars rounded to six
significant digits; the downsample factor is chosen so a tile never
exceeds 200x200 cells and an encoded SNAPSHOT stays within the configured
byte budget.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass

import numpy as np

from .config import MAX_TILE_EDGE, RunConfig
from .errors import FrameError

COMMAND_OPS = (
    "SET_BOUNDARY",
    "SET_SOURCE",
    "CLEAR_SOURCE",
    "SET_MODE",
    "PAUSE",
    "RESUME",
    "RESTART",
    "SET_TOLERANCE",
)


def encode_payload(obj: dict) -> bytes:
    return json.dumps(obj, separators=(",", ":"), allow_nan=False).encode()


def decode_payload(data: bytes) -> dict:
    try:
        obj = json.loads(data.decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise FrameError(f"frame payload is not valid JSON: {e}") from e
    if not isinstance(obj, dict) or "type" not in obj:
        raise FrameError("frame payload must be an object with a 'type' field")
    return obj


def downsample(values: np.ndarray, factor: int) -> np.ndarray:
    """Block means: each tile cell is the mean of a factor x factor block.

    Edge blocks may be smaller; factor 1 is the identity.
    """
    if factor < 1:
        raise ValueError("downsample factor must be >= 1")
    v = np.asarray(values, dtype=np.float64)
    if factor == 1:
        return v.copy()
    h, w = v.shape
    row_idx = np.arange(0, h, factor)
    col_idx = np.arange(0, w, factor)
    sums = np.add.reduceat(np.add.reduceat(v, row_idx, axis=0), col_idx, axis=1)
    row_counts = np.minimum(row_idx + factor, h) - row_idx
    col_counts = np.minimum(col_idx + factor, w) - col_idx
    return sums / np.outer(row_counts, col_counts)


def _round_sig(x: float, digits: int = 6) -> float:
    if x == 0 or not math.isfinite(x):
        return x
    return round(x, digits - 1 - int(math.floor(math.log10(abs(x)))))


@dataclass
class Snapshot:
    """One broadcast of simulation state, downsampled for the wire."""

    segment: int
    mode: str
    iterations: dict[int, int]
    residual: float | None
    residual_kind: str  # "verified" | "tentative"
    live: bool
    tile: np.ndarray
    factor: int
    width: int
    height: int
    timestamp: float

    def to_payload(self) -> dict:
        th, tw = self.tile.shape
        return {
            "type": "SNAPSHOT",
            "segment": self.segment,
            "mode": self.mode,
            "iterations": {str(k): v for k, v in sorted(self.iterations.items())},
            "residual": None if self.residual is None else _round_sig(self.residual, 9),
            "residual_kind": self.residual_kind,
            "live": self.live,
            "tile": [_round_sig(float(x)) for x in self.tile.ravel()],
            "tile_width": tw,
            "tile_height": th,
            "factor": self.factor,
            "width": self.width,
            "height": self.height,
            "timestamp": self.timestamp,
        }


def make_snapshot(
    values: np.ndarray,
    segment: int,
    mode: str,
    iterations: dict[int, int],
    residual: float | None,
    residual_kind: str,
    live: bool,
    factor: int = 0,
    byte_budget: int = 256 * 1024,
) -> tuple[Snapshot, bytes]:
    """Build a snapshot and its encoded payload within the byte budget.

    With factor 0 the factor starts at the smallest value that keeps the
    tile at or under 200x200 and grows until the encoded frame fits.
    """
    h, w = values.shape
    auto = factor == 0
    if auto:
        factor = max(1, math.ceil(max(h, w) / MAX_TILE_EDGE))
    while True:
        tile = downsample(values, factor)
        snap = Snapshot(
            segment=segment,
            mode=mode,
            iterations=iterations,
            residual=residual,
            residual_kind=residual_kind,
            live=live,
            tile=tile,
            factor=factor,
            width=w,
            height=h,
            timestamp=time.time(),
        )
        encoded = encode_payload(snap.to_payload())
        if len(encoded) <= byte_budget or not auto:
            return snap, encoded
        factor += 1


def validate_command(command: dict, config: RunConfig) -> str | None:
    """Check a steering command against the grid; returns a reason or None.

    Commands are validated before acknowledgment so a bad edit never
    reaches the engine.
    """
    if not isinstance(command, dict):
        return "invalid_frame"
    op = command.get("op")
    if op not in COMMAND_OPS:
        return "unknown_command"
    if op == "SET_BOUNDARY":
        if command.get("edge") not in ("north", "south", "east", "west"):
            return "invalid_value"
        if not _is_finite_number(command.get("value")):
            return "invalid_value"
    elif op in ("SET_SOURCE", "CLEAR_SOURCE"):
        x, y = command.get("x"), command.get("y")
        if not (isinstance(x, int) and isinstance(y, int)):
            return "invalid_value"
        if not (1 <= x <= config.width - 2 and 1 <= y <= config.height - 2):
            return "out_of_bounds"
        if op == "SET_SOURCE" and not _is_finite_number(command.get("value")):
            return "invalid_value"
    elif op == "SET_MODE":
        if command.get("mode") not in ("sync", "async"):
            return "invalid_value"
    elif op == "SET_TOLERANCE":
        v = command.get("value")
        if not _is_finite_number(v) or v <= 0:
            return "invalid_value"
    elif op == "RESTART":
        if not isinstance(command.get("keep_field", False), bool):
            return "invalid_value"
    return None


def _is_finite_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def hello_payload(segment: int, config: RunConfig) -> dict:
    return {"type": "HELLO", "segment": segment, "config": config.to_dict()}


def ack_payload(command_id) -> dict:
    return {"type": "ACK", "id": command_id}


def reject_payload(command_id, reason: str) -> dict:
    return {"type": "REJECT", "id": command_id, "reason": reason}
