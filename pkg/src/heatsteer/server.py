"""Live steering session service.

Wraps the threaded engine in run segments, broadcasts downsampled
snapshots on a fixed period, and applies steering commands at worker
sweep boundaries.  Two listeners speak the same JSON payloads: a raw
stream socket using 4-byte length-prefixed frames, and a WebSocket
endpoint for browser clients.

Engine progress never depends on any client's I/O: every client has its
own bounded outbound queue (depth 8, drop-oldest) drained by its own
sender task, and the broadcaster only ever enqueues.
"""

from __future__ import annotations

import asyncio
import contextlib
import logging
from collections import deque
from dataclasses import replace

from .config import IterationMode, RunConfig
from .engine import ThreadedEngine
from .errors import FrameError
from .protocol import (
    ack_payload,
    decode_payload,
    encode_payload,
    hello_payload,
    make_snapshot,
    reject_payload,
    validate_command,
)
from .transport import encode_frame, read_frame

log = logging.getLogger(__name__)

QUEUE_DEPTH = 8


class SteerSession:
    """One simulation lifecycle: a sequence of engine run segments.

    A segment ends on RESTART, on SET_MODE, or implicitly when a
    parameter edit arrives after the engine has converged and stopped;
    the field can carry across segments but iteration counters reset and
    the segment id increments.
    """

    def __init__(self, config: RunConfig):
        config.validate()
        self.config = config
        self.segment = 1
        self.engine = ThreadedEngine(config)

    def start(self) -> None:
        self.engine.start()

    def shutdown(self) -> None:
        self.engine.stop()
        self.engine.wait(timeout=10.0)

    def restart_segment(self, keep_field: bool) -> None:
        self.engine.stop()
        self.engine.wait(timeout=30.0)
        carried = None
        if keep_field:
            try:
                carried = self.engine.result().field
            except Exception:
                # a crashed segment has no field worth carrying
                log.exception("segment %d ended abnormally", self.segment)
        self.engine = ThreadedEngine(self.config, initial_field=carried)
        self.segment += 1
        self.engine.start()

    def snapshot_bytes(self) -> bytes:
        values, counts = self.engine.live_snapshot()
        residual, kind = self.engine.snapshot_residual()
        _, encoded = make_snapshot(
            values,
            segment=self.segment,
            mode=self.config.mode.value,
            iterations=counts,
            residual=residual,
            residual_kind=kind,
            live=True,
            factor=self.config.downsample,
            byte_budget=self.config.byte_budget,
        )
        return encoded

    def hello_bytes(self) -> bytes:
        return encode_payload(hello_payload(self.segment, self.config))

    def apply_command(self, command: dict) -> str | None:
        """Apply one validated steering command; returns a reason to reject.

        Runs on a worker thread (the engine quiesce blocks); the caller
        serializes all command applications.
        """
        reason = validate_command(command, self.config)
        if reason is not None:
            return reason
        op = command["op"]
        if op == "PAUSE":
            self.engine.pause()
        elif op == "RESUME":
            self.engine.resume()
        elif op == "RESTART":
            self.restart_segment(bool(command.get("keep_field", False)))
        elif op == "SET_MODE":
            mode = IterationMode.parse(command["mode"])
            if mode is not self.config.mode:
                self.config = replace(self.config, mode=mode)
                self.restart_segment(keep_field=True)
        elif op == "SET_BOUNDARY":
            edge, value = command["edge"], float(command["value"])
            self.config = replace(self.config, **{edge: value})
            if self.engine.finished:
                self.restart_segment(keep_field=True)
            else:
                self.engine.set_boundary(edge, value)
        elif op == "SET_SOURCE":
            x, y, value = command["x"], command["y"], float(command["value"])
            cells = [c for c in self.config.sources if not (c[0] == x and c[1] == y)]
            cells.append((x, y, value))
            self.config = replace(self.config, sources=cells)
            if self.engine.finished:
                self.restart_segment(keep_field=True)
            else:
                self.engine.set_source(x, y, value)
        elif op == "CLEAR_SOURCE":
            x, y = command["x"], command["y"]
            cells = [c for c in self.config.sources if not (c[0] == x and c[1] == y)]
            self.config = replace(self.config, sources=cells)
            if self.engine.finished:
                self.restart_segment(keep_field=True)
            else:
                self.engine.clear_source(x, y)
        elif op == "SET_TOLERANCE":
            value = float(command["value"])
            self.config = replace(self.config, tolerance=value)
            if self.engine.finished:
                self.restart_segment(keep_field=True)
            else:
                self.engine.set_tolerance(value)
        return None


class _Client:
    """One connected steering client with a bounded outbound queue."""

    _ids = 0

    def __init__(self, send_coro):
        _Client._ids += 1
        self.id = _Client._ids
        self._send = send_coro  # async fn(bytes)
        self.queue: deque[bytes] = deque(maxlen=QUEUE_DEPTH)  # drop-oldest
        self.wakeup = asyncio.Event()
        self.closed = False

    def enqueue(self, payload: bytes) -> None:
        self.queue.append(payload)
        self.wakeup.set()

    async def sender_loop(self) -> None:
        while not self.closed:
            await self.wakeup.wait()
            self.wakeup.clear()
            while self.queue:
                payload = self.queue.popleft()
                await self._send(payload)


class SteerServer:
    """Snapshot broadcaster plus command intake over TCP and WebSocket."""

    def __init__(
        self,
        config: RunConfig,
        host: str = "127.0.0.1",
        port: int = 0,
        ws_port: int | None = None,
    ):
        self.session = SteerSession(config)
        self.host = host
        self.port = port
        self.ws_port = ws_port
        self.clients: set[_Client] = set()
        self.lock = asyncio.Lock()  # serializes commands against snapshots
        self.commands: asyncio.Queue = asyncio.Queue()
        self._tasks: list[asyncio.Task] = []
        self._tcp_server = None
        self._ws_server = None

    async def start(self) -> None:
        self.session.start()
        self._tcp_server = await asyncio.start_server(
            self._handle_tcp, self.host, self.port
        )
        self.port = self._tcp_server.sockets[0].getsockname()[1]
        if self.ws_port is not None:
            import websockets

            self._ws_server = await websockets.serve(
                self._handle_ws, self.host, self.ws_port
            )
            self.ws_port = next(
                sock.getsockname()[1] for sock in self._ws_server.sockets
            )
        self._tasks.append(asyncio.create_task(self._broadcast_loop()))
        self._tasks.append(asyncio.create_task(self._command_loop()))
        log.info("steering server on %s:%d (ws: %s)", self.host, self.port, self.ws_port)

    async def stop(self) -> None:
        for t in self._tasks:
            t.cancel()
        for t in self._tasks:
            with contextlib.suppress(asyncio.CancelledError):
                await t
        if self._tcp_server is not None:
            self._tcp_server.close()
            await self._tcp_server.wait_closed()
        if self._ws_server is not None:
            self._ws_server.close()
            await self._ws_server.wait_closed()
        await asyncio.get_running_loop().run_in_executor(
            None, self.session.shutdown
        )

    async def serve_forever(self) -> None:
        await asyncio.Event().wait()

    # -- broadcast ----------------------------------------------------------

    async def _broadcast_loop(self) -> None:
        period = self.session.config.snapshot_period
        loop = asyncio.get_running_loop()
        while True:
            async with self.lock:
                payload = await loop.run_in_executor(
                    None, self.session.snapshot_bytes
                )
                for client in list(self.clients):
                    client.enqueue(payload)
            await asyncio.sleep(period)

    # -- command intake -------------------------------------------------------

    async def _command_loop(self) -> None:
        """Single consumer: a total order over all clients' commands."""
        loop = asyncio.get_running_loop()
        while True:
            client, payload = await self.commands.get()
            cid = payload.get("id")
            command = payload.get("command")
            async with self.lock:
                try:
                    reason = await loop.run_in_executor(
                        None, self.session.apply_command, command
                    )
                except Exception:
                    log.exception("command application failed")
                    reason = "internal_error"
            reply = ack_payload(cid) if reason is None else reject_payload(cid, reason)
            if not client.closed:
                client.enqueue(encode_payload(reply))

    # -- TCP ---------------------------------------------------------------

    async def _handle_tcp(self, reader, writer) -> None:
        async def send(payload: bytes) -> None:
            writer.write(encode_frame(payload))
            await writer.drain()

        client = _Client(send)
        sender = None
        try:
            await send(self.session.hello_bytes())
            self.clients.add(client)
            sender = asyncio.create_task(client.sender_loop())
            while True:
                frame = await read_frame(reader)
                self._intake(client, frame)
        except (EOFError, ConnectionResetError, asyncio.IncompleteReadError):
            pass
        except FrameError as e:
            log.warning("client %d protocol error: %s", client.id, e)
        finally:
            await self._drop(client, sender)
            writer.close()
            with contextlib.suppress(Exception):
                await writer.wait_closed()

    # -- WebSocket -----------------------------------------------------------

    async def _handle_ws(self, websocket) -> None:
        async def send(payload: bytes) -> None:
            await websocket.send(payload.decode())

        client = _Client(send)
        sender = None
        try:
            await send(self.session.hello_bytes())
            self.clients.add(client)
            sender = asyncio.create_task(client.sender_loop())
            async for message in websocket:
                data = message.encode() if isinstance(message, str) else message
                self._intake(client, data)
        except FrameError as e:
            log.warning("ws client %d protocol error: %s", client.id, e)
        except Exception:
            pass  # connection teardown
        finally:
            await self._drop(client, sender)

    # -- shared ---------------------------------------------------------------

    def _intake(self, client: _Client, data: bytes) -> None:
        payload = decode_payload(data)  # FrameError drops the connection
        if payload.get("type") != "COMMAND":
            raise FrameError(f"unexpected frame type {payload.get('type')!r}")
        self.commands.put_nowait((client, payload))

    async def _drop(self, client: _Client, sender) -> None:
        client.closed = True
        client.wakeup.set()
        self.clients.discard(client)
        if sender is not None:
            sender.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await sender


async def serve(
    config: RunConfig,
    host: str = "127.0.0.1",
    port: int = 8750,
    ws_port: int | None = 8751,
) -> SteerServer:
    server = SteerServer(config, host=host, port=port, ws_port=ws_port)
    await server.start()
    return server
