"""Simulated network: scheduling, FIFO, loss, determinism, framing."""

import socket
import threading

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from heatsteer.clocks import VirtualClock, WallClock
from heatsteer.engine import HaloMessage
from heatsteer.errors import FrameError, LinkDownError
from heatsteer.transport import (
    LinkModel,
    SimulatedTransport,
    encode_frame,
    read_frame_sync,
    transfer_time,
    write_frame_sync,
)


# --- analytic model ----------------------------------------------------------


def test_transfer_time_latency_only():
    assert transfer_time(0, LinkModel(latency=0.001)) == 0.001


def test_transfer_time_paper_mesh():
    # 200k doubles over 100 Mbps with 1 ms response
    link = LinkModel(latency=0.001, bandwidth=12_500_000)
    t = transfer_time(200_000 * 8, link)
    assert t == 0.001 + 1_600_000 / 12_500_000
    assert t == pytest.approx(0.129, abs=1e-12)


def test_transfer_time_scales_linearly():
    link = LinkModel(latency=0.001, bandwidth=12_500_000)
    assert 10_000 * transfer_time(1_600_000, link) == pytest.approx(1290.0)


def test_transfer_time_halves_with_double_bandwidth():
    single = transfer_time(8_000, LinkModel(bandwidth=1e6))
    double = transfer_time(8_000, LinkModel(bandwidth=2e6))
    assert double == single / 2


@given(
    p1=st.floats(0, 1e9), p2=st.floats(0, 1e9),
    latency=st.floats(0, 10),
    bw=st.floats(1e3, 1e12),
)
@settings(max_examples=80, deadline=None)
def test_transfer_time_monotone(p1, p2, latency, bw):
    link = LinkModel(latency=latency, bandwidth=bw)
    lo, hi = sorted([p1, p2])
    assert transfer_time(lo, link) <= transfer_time(hi, link)
    assert transfer_time(lo, LinkModel(latency=latency, bandwidth=bw * 2)) <= (
        transfer_time(lo, link)
    )
    assert transfer_time(lo, LinkModel(latency=latency + 1, bandwidth=bw)) >= (
        transfer_time(lo, link)
    )


def test_link_model_validation():
    with pytest.raises(ValueError):
        LinkModel(latency=-1)
    with pytest.raises(ValueError):
        LinkModel(bandwidth=0)
    with pytest.raises(ValueError):
        LinkModel(loss_probability=1.5)


# --- simulated delivery -------------------------------------------------------


def test_immediate_delivery_on_fast_link():
    t = SimulatedTransport(WallClock())
    t.open_link("a")
    t.send("a", "hello")
    assert t.poll("a") == "hello"
    assert t.poll("a") is None


def test_delivery_respects_latency():
    clock = VirtualClock()
    t = SimulatedTransport(clock)
    t.open_link("a", LinkModel(latency=0.050))
    t.send("a", "msg")
    clock.advance(0.010)
    assert t.poll("a") is None
    clock.advance(0.050)
    assert t.poll("a") == "msg"


def test_fifo_within_link_despite_jitter():
    clock = VirtualClock()
    t = SimulatedTransport(clock)
    t.open_link("a", LinkModel(latency=0.01, jitter=0.009, seed=3))
    for i in range(50):
        t.send("a", i)
    clock.advance(10.0)
    out = t.poll_all("a")
    assert out == list(range(50))


def test_loss_never_delivers():
    clock = VirtualClock()
    t = SimulatedTransport(clock)
    t.open_link("a", LinkModel(loss_probability=1.0, seed=1))
    for i in range(20):
        t.send("a", i)
    clock.advance(100.0)
    assert t.poll_all("a") == []


def test_closed_link_raises():
    t = SimulatedTransport(WallClock())
    t.open_link("a")
    t.close_link("a")
    with pytest.raises(LinkDownError):
        t.send("a", 1)
    with pytest.raises(LinkDownError):
        t.poll("b")


def test_latest_only_overwrites_undelivered():
    clock = VirtualClock()
    t = SimulatedTransport(clock)
    t.open_link("a", LinkModel(), latest_only=True)
    t.send("a", "old")
    t.send("a", "new")
    clock.advance(1.0)
    assert t.poll_all("a") == ["new"]


def test_seeded_delay_sequences_reproduce():
    def trace_for(seed):
        clock = VirtualClock()
        t = SimulatedTransport(clock, record_trace=True)
        t.open_link("a", LinkModel(latency=0.01, jitter=0.005,
                                   loss_probability=0.3, seed=seed))
        for i in range(200):
            t.send("a", i)
            clock.advance(0.001)
        return t.trace

    assert trace_for(11) == trace_for(11)
    assert trace_for(11) != trace_for(12)


def test_virtual_clock_advance_orders_events():
    clock = VirtualClock()
    t = SimulatedTransport(clock)
    t.open_link("a", LinkModel(latency=0.005))
    t.open_link("b", LinkModel(latency=0.005))
    t.send("a", "first")
    t.send("b", "second")
    fired = t.advance(0.005)
    assert [f[2] for f in fired] == ["a", "b"]  # tie broken by sequence
    assert fired[0][1] < fired[1][1]


def test_advance_zero_fires_nothing():
    clock = VirtualClock()
    t = SimulatedTransport(clock)
    t.open_link("a", LinkModel(latency=0.001))
    t.send("a", 1)
    assert t.advance(0.0) == []


def test_virtual_clock_refuses_rewind():
    clock = VirtualClock()
    clock.advance(1.0)
    with pytest.raises(ValueError):
        clock.advance_to(0.5)
    with pytest.raises(RuntimeError):
        clock.sleep(0.1)


# --- atomicity under concurrent stress -----------------------------------------


def test_no_torn_strips_under_stress():
    """Strips tagged with their iteration at head and tail never mix sends."""
    t = SimulatedTransport(WallClock())
    t.open_link("halo", latest_only=True)
    iterations = 4000
    errors = []

    def sender():
        for k in range(1, iterations + 1):
            strip = np.full(64, float(k))
            t.send("halo", HaloMessage(1, "south", strip, k, k),
                   size_bytes=strip.nbytes)

    def receiver():
        last = 0
        seen = 0
        while seen < iterations // 2:
            msg = t.poll("halo")
            if msg is None:
                seen += 1  # sender may already be done
                continue
            try:
                msg.verify()
                if msg.sender_iteration < last:
                    errors.append(f"tag went backwards: {msg.sender_iteration}")
                last = msg.sender_iteration
                if not np.all(msg.strip == float(msg.sender_iteration)):
                    errors.append(f"torn strip at {msg.sender_iteration}")
            except AssertionError as e:
                errors.append(str(e))

    ts = threading.Thread(target=sender)
    tr = threading.Thread(target=receiver)
    ts.start(); tr.start()
    ts.join(); tr.join()
    assert errors == []


# --- real-socket framing --------------------------------------------------------


def test_frame_roundtrip_over_socketpair():
    a, b = socket.socketpair()
    try:
        write_frame_sync(a, b"hello world")
        write_frame_sync(a, b"")
        assert read_frame_sync(b) == b"hello world"
        assert read_frame_sync(b) == b""
    finally:
        a.close(); b.close()


def test_frame_rejects_oversize():
    with pytest.raises(FrameError):
        encode_frame(b"x" * (17 * 1024 * 1024))
    a, b = socket.socketpair()
    try:
        a.sendall((10_000_000).to_bytes(4, "big"))
        with pytest.raises(FrameError):
            read_frame_sync(b, max_size=1024)
    finally:
        a.close(); b.close()
