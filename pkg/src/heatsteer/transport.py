"""Message transport.

Two implementations share one interface:

* an in-process simulated network with injectable per-link latency,
  bandwidth, jitter and loss, usable against either the wall clock or a
  virtual clock;
* length-prefixed framing helpers for the real stream socket used by the
  steering link (4-byte big-endian unsigned length, then payload).

A link is a named unidirectional channel.  Delivery is FIFO per link:
even when jitter would reorder scheduled delivery times, a message is
never handed out before its predecessors.  Links opened with
``latest_only=True`` behave as a capacity-1 mailbox where a newer send
overwrites any strip the receiver has not picked up yet.
"""

from __future__ import annotations

import itertools
import math
import random
import struct
import threading
from collections import deque
from dataclasses import dataclass

from .errors import FrameError, LinkDownError


@dataclass(frozen=True)
class LinkModel:
    """Analytic description of one network link.

    latency in seconds, bandwidth in bytes/second, jitter as the uniform
    half-width of a symmetric delay perturbation, loss_probability in
    [0, 1].  Identical seeds yield identical delay/loss sequences.
    """

    latency: float = 0.0
    bandwidth: float = math.inf
    jitter: float = 0.0
    loss_probability: float = 0.0
    seed: int | None = None

    def __post_init__(self):
        if self.latency < 0:
            raise ValueError("latency must be >= 0")
        if not self.bandwidth > 0:
            raise ValueError("bandwidth must be > 0")
        if self.jitter < 0:
            raise ValueError("jitter must be >= 0")
        if not 0.0 <= self.loss_probability <= 1.0:
            raise ValueError("loss_probability must be in [0, 1]")


#: 100 Mbps in the decimal network-engineering convention.
MBPS = 12_500_000 / 100


def transfer_time(payload_bytes: float, link: LinkModel) -> float:
    """Closed-form time to move a payload over a link.

    latency + payload / bandwidth.  Jitter and loss are ignored; this is
    the analytic model, not the simulation.
    """
    if payload_bytes < 0:
        raise ValueError("payload must be >= 0 bytes")
    return link.latency + payload_bytes / link.bandwidth


@dataclass
class Envelope:
    seq: int
    payload: object
    size_bytes: int
    send_time: float
    delivery_time: float


class _Link:
    __slots__ = ("model", "rng", "queue", "latest_only", "open", "lock")

    def __init__(self, model: LinkModel, latest_only: bool):
        self.model = model
        self.rng = random.Random(model.seed)
        self.queue: deque[Envelope] = deque()
        self.latest_only = latest_only
        self.open = True
        self.lock = threading.Lock()


class SimulatedTransport:
    """In-process network with scheduled deliveries.

    Safe for concurrent senders and pollers; every link keeps its own lock
    and seeded RNG so delay/loss sequences stay reproducible per link.
    """

    def __init__(self, clock, record_trace: bool = False):
        self.clock = clock
        self._links: dict[object, _Link] = {}
        # itertools.count is a single C call, so it is atomic under the GIL
        self._seq = itertools.count(1)
        self.record_trace = record_trace
        self.trace: list[tuple] = []
        self._trace_lock = threading.Lock()

    def open_link(
        self, link_id, model: LinkModel | None = None, latest_only: bool = False
    ) -> None:
        self._links[link_id] = _Link(model or LinkModel(), latest_only)

    def close_link(self, link_id) -> None:
        link = self._links.get(link_id)
        if link is not None:
            link.open = False

    def _link(self, link_id) -> _Link:
        link = self._links.get(link_id)
        if link is None or not link.open:
            raise LinkDownError(f"link {link_id!r} is not open")
        return link

    def _next_seq(self) -> int:
        return next(self._seq)

    def send(self, link_id, payload, size_bytes: int = 0) -> None:
        """Enqueue a message; never blocks beyond the local enqueue.

        The scheduled delivery time is send time + latency + size/bandwidth
        + a jitter draw.  A loss draw may drop the message entirely; lost
        messages are never delivered.
        """
        link = self._link(link_id)
        now = self.clock.now()
        seq = self._next_seq()
        with link.lock:
            m = link.model
            if m.loss_probability > 0 and link.rng.random() < m.loss_probability:
                if self.record_trace:
                    self._trace_add(("drop", link_id, seq, now))
                return
            delay = m.latency + size_bytes / m.bandwidth
            if m.jitter > 0:
                delay += link.rng.uniform(-m.jitter, m.jitter)
            delivery = now + max(0.0, delay)
            if link.latest_only:
                link.queue.clear()
            link.queue.append(Envelope(seq, payload, size_bytes, now, delivery))
            if self.record_trace:
                self._trace_add(("send", link_id, seq, now, delivery))

    def poll(self, link_id):
        """Return the next due message, or None.

        Only the head of the queue is considered so send order is
        preserved even when jitter scrambles scheduled times.
        """
        link = self._link(link_id)
        now = self.clock.now()
        with link.lock:
            if link.queue and link.queue[0].delivery_time <= now:
                env = link.queue.popleft()
                return env.payload
            return None

    def poll_all(self, link_id) -> list:
        """Drain every currently-due message, oldest first."""
        link = self._link(link_id)
        now = self.clock.now()
        out = []
        with link.lock:
            while link.queue and link.queue[0].delivery_time <= now:
                out.append(link.queue.popleft().payload)
        return out

    def pending(self, link_id) -> int:
        link = self._link(link_id)
        with link.lock:
            return len(link.queue)

    def head_delivery(self, link_id) -> float | None:
        """Scheduled delivery time of the next in-order message, if any."""
        link = self._link(link_id)
        with link.lock:
            return link.queue[0].delivery_time if link.queue else None

    def next_delivery_time(self) -> float | None:
        """Earliest head-of-queue delivery across all open links."""
        best = None
        for link in self._links.values():
            with link.lock:
                if link.open and link.queue:
                    t = link.queue[0].delivery_time
                    if best is None or t < best:
                        best = t
        return best

    def advance(self, duration: float) -> list[tuple]:
        """Advance a virtual clock and report which deliveries became due.

        Events are returned ordered by (delivery_time, sequence number).
        Only meaningful with a VirtualClock; wall-clock mode does not call
        this.
        """
        horizon = self.clock.advance(duration)
        fired = []
        for link_id, link in self._links.items():
            with link.lock:
                for env in link.queue:
                    if env.delivery_time <= horizon:
                        fired.append((env.delivery_time, env.seq, link_id))
        fired.sort()
        return fired

    def _trace_add(self, entry: tuple) -> None:
        with self._trace_lock:
            self.trace.append(entry)


# --- real-socket framing ---------------------------------------------------

_HEADER = struct.Struct(">I")
MAX_FRAME = 16 * 1024 * 1024


def encode_frame(payload: bytes) -> bytes:
    """Length-prefix a payload: 4-byte big-endian unsigned length, then bytes."""
    if len(payload) > MAX_FRAME:
        raise FrameError(f"frame of {len(payload)} bytes exceeds {MAX_FRAME}")
    return _HEADER.pack(len(payload)) + payload


async def read_frame(reader, max_size: int = MAX_FRAME) -> bytes:
    """Read one length-prefixed frame from an asyncio StreamReader.

    Raises FrameError on oversize frames; EOFError at a clean end of
    stream; IncompleteReadError surfaces as FrameError (truncated frame).
    """
    import asyncio

    try:
        header = await reader.readexactly(_HEADER.size)
    except asyncio.IncompleteReadError as e:
        if not e.partial:
            raise EOFError("connection closed")
        raise FrameError("truncated frame header") from e
    (length,) = _HEADER.unpack(header)
    if length > max_size:
        raise FrameError(f"frame of {length} bytes exceeds limit {max_size}")
    try:
        return await reader.readexactly(length)
    except asyncio.IncompleteReadError as e:
        raise FrameError("truncated frame body") from e


def write_frame_sync(sock, payload: bytes) -> None:
    sock.sendall(encode_frame(payload))


def read_frame_sync(sock, max_size: int = MAX_FRAME) -> bytes:
    """Blocking-socket version of read_frame, for scripted test clients."""
    header = _read_exact(sock, _HEADER.size)
    (length,) = _HEADER.unpack(header)
    if length > max_size:
        raise FrameError(f"frame of {length} bytes exceeds limit {max_size}")
    return _read_exact(sock, length)


def _read_exact(sock, n: int) -> bytes:
    buf = b""
    while len(buf) < n:
        chunk = sock.recv(n - len(buf))
        if not chunk:
            raise EOFError("connection closed")
        buf += chunk
    return buf
