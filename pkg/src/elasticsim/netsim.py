"""Deterministic discrete-event simulator for a dumbbell topology.

Senders sit behind dedicated access links feeding a shared bottleneck
router; receivers acknowledge every data packet cumulatively. The
droptail buffer and the random packet error rate apply only at the
bottleneck. ACKs ride the reverse path as pure propagation delay (40
bytes of ACK traffic is negligible next to the data direction and is
never error-dropped).

Time is kept in integer nanoseconds so event ordering is exact; ties are
broken by insertion order. Runs are reproducible: identical config and
seed give identical traces, byte for byte, because the only randomness
is the seeded per-run error stream.
"""
from __future__ import annotations

import csv
import heapq
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import (
    AckDup,
    AckNew,
    CcaState,
    CongestionControl,
    LossTimeout,
    allowed_in_flight,
    make_cca,
)

__all__ = [
    "Link",
    "FlowSchedule",
    "ScenarioConfig",
    "Packet",
    "DropTailQueue",
    "LinkState",
    "EventQueue",
    "FlowCounters",
    "RunTrace",
    "enqueue_droptail",
    "transmit",
    "maybe_drop_error",
    "run_scenario",
]

NS = 1_000_000_000

# New transmissions released per ACK (or other send opportunity). Two
# covers slow start's doubling; anything larger would dump the deficit
# after a recovery exit into the queue back-to-back, which a small
# buffer cannot absorb.
MAX_BURST = 2

# RTO estimator constants: classic smoothed estimator. The 200 ms floor
# applies to the variance term (as deployed stacks do), because a long
# stretch of queue-pinned RTT samples drives the variance to zero and a
# bare srtt deadline then races the retransmission's own round trip.
RTO_FLOOR = 0.2
RTO_CEILING = 60.0
RTO_INITIAL = 1.0
RTO_MAX_BACKOFF = 64


def _ns(seconds: float) -> int:
    return int(round(seconds * NS))


@dataclass(frozen=True)
class Link:
    """One directed link: rate in bits/s, one-way propagation delay in s.

    ``queue_capacity`` (packets, None for unbounded) and ``per`` (packet
    error rate) only take effect on the bottleneck.
    """

    rate: float
    prop_delay: float
    queue_capacity: Optional[int] = None
    per: float = 0.0


@dataclass(frozen=True)
class FlowSchedule:
    """When a flow is allowed to send and which algorithm drives it."""

    flow_id: int
    cca: str
    start: float = 0.0
    stop: float = math.inf
    beta: Optional[float] = None


@dataclass
class ScenarioConfig:
    """Everything one simulation run needs.

    ``max_cwnd`` optionally caps the window (packets); the default is
    uncapped. ``trace_interval`` controls how often the cwnd/RTT series
    are sampled.
    """

    bottleneck: Link
    flows: list
    access: Link = Link(rate=1e9, prop_delay=0.0005)
    duration: float = 100.0
    packet_size: int = 1000
    ack_size: int = 40
    seed: int = 1
    max_cwnd: Optional[float] = None
    trace_interval: float = 0.1

    def validate(self) -> None:
        if self.duration <= 0:
            raise ValueError(f"duration must be positive, got {self.duration}")
        if self.packet_size <= 0:
            raise ValueError(
                f"packet_size must be positive, got {self.packet_size}"
            )
        if not self.flows:
            raise ValueError("at least one flow is required")
        seen = set()
        for f in self.flows:
            if f.flow_id in seen:
                raise ValueError(f"duplicate flow_id {f.flow_id}")
            seen.add(f.flow_id)
            if f.start < 0 or f.stop <= f.start:
                raise ValueError(
                    f"flow {f.flow_id}: need 0 <= start < stop, "
                    f"got start={f.start} stop={f.stop}"
                )
            make_cca(f.cca)  # raises on unknown names
            if f.beta is not None and not 0.0 < f.beta < 1.0:
                raise ValueError(
                    f"flow {f.flow_id}: beta must be in (0, 1), got {f.beta}"
                )
        for name, link in (("access", self.access), ("bottleneck", self.bottleneck)):
            if link.rate <= 0 or link.prop_delay < 0:
                raise ValueError(f"{name} link needs rate > 0 and delay >= 0")
            if not 0.0 <= link.per <= 1.0:
                raise ValueError(f"{name} link per must be in [0, 1]")
            if link.queue_capacity is not None and link.queue_capacity < 1:
                raise ValueError(f"{name} queue_capacity must be >= 1")
        if self.bottleneck.rate > self.access.rate:
            raise ValueError(
                "bottleneck rate must not exceed the access rate "
                f"({self.bottleneck.rate} > {self.access.rate})"
            )
        if self.max_cwnd is not None and self.max_cwnd < 2:
            raise ValueError(f"max_cwnd must be >= 2, got {self.max_cwnd}")
        if self.trace_interval <= 0:
            raise ValueError("trace_interval must be positive")


@dataclass(slots=True)
class Packet:
    """A data packet in flight. Sizes are bytes, times nanoseconds."""

    id: int
    flow: int
    kind: str
    seq: int
    size: int
    sent_at_ns: int
    retransmission: bool


class DropTailQueue:
    """Bounded FIFO; arrivals beyond the capacity are dropped."""

    def __init__(self, capacity: Optional[int] = None):
        if capacity is not None and capacity < 1:
            raise ValueError(f"queue_capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self.items: deque = deque()

    def __len__(self) -> int:
        return len(self.items)


def enqueue_droptail(queue: DropTailQueue, packet) -> bool:
    """Append to the FIFO if room remains; True = accepted, False = dropped."""
    if queue.capacity is not None and len(queue.items) >= queue.capacity:
        return False
    queue.items.append(packet)
    return True


class LinkState:
    """Serialization bookkeeping for one directed link."""

    def __init__(self, link: Link):
        self.link = link
        self.busy_until_ns = 0


def transmit(link: LinkState, packet, now: float) -> float:
    """Serialize one packet and return its delivery time in seconds.

    Delivery is serialization completion plus propagation; a packet that
    finds the link busy starts serializing when the previous one ends, so
    back-to-back sends space out by exactly one serialization time.
    """
    now_ns = _ns(now)
    ser_ns = int(round(packet.size * 8 * NS / link.link.rate))
    start = max(now_ns, link.busy_until_ns)
    done = start + ser_ns
    link.busy_until_ns = done
    return (done + _ns(link.link.prop_delay)) / NS


def maybe_drop_error(rng, per: float) -> bool:
    """Bernoulli error draw; per=0 never drops, per=1 always drops."""
    if not 0.0 <= per <= 1.0:
        raise ValueError(f"per must be in [0, 1], got {per}")
    return bool(rng.random() < per)


class EventQueue:
    """Min-heap of (time_ns, insertion_seq, kind, payload) tuples.

    The insertion sequence breaks time ties first-in first-out, which
    keeps event ordering fully deterministic.
    """

    def __init__(self):
        self.heap: list = []
        self.seq = 0

    def push(self, time_ns: int, kind: int, payload=None):
        heapq.heappush(self.heap, (time_ns, self.seq, kind, payload))
        self.seq += 1

    def pop(self):
        return heapq.heappop(self.heap)

    def __len__(self) -> int:
        return len(self.heap)


# event kinds
EV_FLOW_START = 0
EV_BN_ARRIVAL = 1
EV_BN_TX_DONE = 2
EV_ACK_ARRIVAL = 3
EV_RTO = 4


@dataclass
class FlowCounters:
    """Per-flow accounting. Counters are transmission/arrival events, so
    sent = recv + qdrop + edrop + in_pipe_end holds exactly."""

    flow_id: int
    cca: str
    start: float
    stop: float
    sent: int = 0
    recv: int = 0
    recv_unique: int = 0
    qdrop: int = 0
    edrop: int = 0
    in_pipe_end: int = 0
    rtt_sum: float = 0.0
    rtt_count: int = 0
    timeouts: int = 0


@dataclass
class RunTrace:
    """Result of one simulation run.

    ``cwnd_series`` holds (time_s, cwnd, phase) samples, ``rtt_series``
    (time_s, rtt_s) samples, and ``decreases`` one entry
    (time_s, cwnd_before, cwnd_after, kind) per multiplicative decrease.
    """

    duration: float
    packet_size: int
    seed: int
    flows: dict = field(default_factory=dict)
    cwnd_series: dict = field(default_factory=dict)
    rtt_series: dict = field(default_factory=dict)
    decreases: dict = field(default_factory=dict)

    def conservation_check(self) -> None:
        """Raise if any flow's packet accounting does not balance."""
        for fid, c in self.flows.items():
            balance = c.recv + c.qdrop + c.edrop + c.in_pipe_end
            if balance != c.sent:
                raise AssertionError(
                    f"flow {fid}: sent={c.sent} but recv+qdrop+edrop+in_pipe="
                    f"{balance}"
                )

    def to_csv(self, path) -> None:
        """Write cwnd trace rows followed by per-flow counter rows."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(
                [
                    "kind",
                    "time_s",
                    "flow_id",
                    "cca",
                    "cwnd_pkts",
                    "phase",
                    "sent_pkts",
                    "recv_pkts",
                    "qdrop_pkts",
                    "edrop_pkts",
                ]
            )
            for fid in sorted(self.cwnd_series):
                cca = self.flows[fid].cca
                for t, cwnd, phase in self.cwnd_series[fid]:
                    w.writerow(
                        [
                            "cwnd",
                            f"{t:.12g}",
                            fid,
                            cca,
                            f"{cwnd:.12g}",
                            phase,
                            "",
                            "",
                            "",
                            "",
                        ]
                    )
            for fid in sorted(self.flows):
                c = self.flows[fid]
                w.writerow(
                    [
                        "counters",
                        "",
                        fid,
                        c.cca,
                        "",
                        "",
                        c.sent,
                        c.recv,
                        c.qdrop,
                        c.edrop,
                    ]
                )


class _Sender:
    """Sequence-level sender logic for one flow.

    Tracks the cumulative ACK edge, duplicate ACK runs and one recovery
    episode at a time: the congestion controller reacts once per episode
    (on the third duplicate ACK) and further holes inside the same window
    are retransmitted as the ACK stream reveals them, without new
    decreases.

    Hole discovery works without selective-ACK blocks. Every ACK echoes
    the sequence number of the packet that triggered it, and the path is
    a single FIFO, so original transmissions are delivered in send order.
    A gap between two consecutively echoed originals during a duplicate
    run can therefore only be dropped packets; those go on
    ``pending_holes`` and are resent one per arriving ACK.
    """

    __slots__ = (
        "fid",
        "sched",
        "cca",
        "st",
        "start_ns",
        "stop_ns",
        "snd_una",
        "snd_nxt",
        "max_seq_sent",
        "dup_count",
        "in_recovery",
        "recover",
        "max_echo",
        "pending_holes",
        "retx_done",
        "edge_retx_ns",
        "pipe_credit",
        "srtt",
        "rttvar",
        "rto",
        "backoff",
        "rto_deadline_ns",
        "timer_armed",
        "rcv_nxt",
        "ooo",
        "counters",
        "access",
        "next_trace_ns",
        "cwnd_series",
        "rtt_series",
        "decreases",
    )

    def __init__(self, sched: FlowSchedule, access: Link, duration: float):
        self.fid = sched.flow_id
        self.sched = sched
        self.cca: CongestionControl = make_cca(sched.cca)
        self.st: CcaState = self.cca.fresh_state(beta=sched.beta)
        self.start_ns = _ns(sched.start)
        self.stop_ns = _ns(min(sched.stop, duration))
        self.snd_una = 0
        self.snd_nxt = 0
        self.max_seq_sent = -1
        self.dup_count = 0
        self.in_recovery = False
        self.recover = -1
        self.max_echo = -1
        self.pending_holes: deque = deque()
        self.retx_done: set = set()
        self.edge_retx_ns = 0
        self.pipe_credit = 0
        self.srtt = None
        self.rttvar = 0.0
        self.rto = RTO_INITIAL
        self.backoff = 1
        self.rto_deadline_ns = 0
        self.timer_armed = False
        self.rcv_nxt = 0
        self.ooo = set()
        self.counters = FlowCounters(
            flow_id=self.fid,
            cca=self.cca.name,
            start=sched.start,
            stop=min(sched.stop, duration),
        )
        self.access = LinkState(access)
        self.next_trace_ns = self.start_ns
        self.cwnd_series = []
        self.rtt_series = []
        self.decreases = []

    def active(self, now_ns: int) -> bool:
        return self.start_ns <= now_ns < self.stop_ns


class Simulation:
    def __init__(self, config: ScenarioConfig):
        config.validate()
        self.cfg = config
        self.duration_ns = _ns(config.duration)
        self.events = EventQueue()
        self.flows = {
            f.flow_id: _Sender(f, config.access, config.duration)
            for f in config.flows
        }
        self.bn_queue = DropTailQueue(config.bottleneck.queue_capacity)
        self.bn_busy = False
        self.bn_busy_until_ns = 0
        self.bn_in_service: Optional[Packet] = None
        self.rng = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(config.seed).spawn(1)[0])
        )
        self.packet_id = 0

        bn = config.bottleneck
        acc = config.access
        self.ser_access_ns = int(round(config.packet_size * 8 * NS / acc.rate))
        self.ser_bn_ns = int(round(config.packet_size * 8 * NS / bn.rate))
        self.prop_access_ns = _ns(acc.prop_delay)
        self.prop_bn_ns = _ns(bn.prop_delay)
        # After bottleneck service: propagate, then cross the receiver's
        # access link (never congested since the bottleneck is slower).
        self.rx_extra_ns = (
            self.prop_bn_ns + self.ser_access_ns + self.prop_access_ns
        )
        # ACKs return by pure propagation.
        self.ack_delay_ns = 2 * self.prop_access_ns + self.prop_bn_ns
        self.trace_interval_ns = _ns(config.trace_interval)

    # ---------------------------------------------------------- sending

    def _send(self, f: _Sender, seq: int, now_ns: int, retx: bool) -> None:
        pkt = Packet(
            id=self.packet_id,
            flow=f.fid,
            kind="data",
            seq=seq,
            size=self.cfg.packet_size,
            sent_at_ns=now_ns,
            retransmission=retx,
        )
        self.packet_id += 1
        f.counters.sent += 1
        start = max(now_ns, f.access.busy_until_ns)
        done = start + self.ser_access_ns
        f.access.busy_until_ns = done
        self.events.push(done + self.prop_access_ns, EV_BN_ARRIVAL, pkt)
        if not f.timer_armed:
            f.rto_deadline_ns = now_ns + _ns(f.rto * f.backoff)
            f.timer_armed = True
            self.events.push(f.rto_deadline_ns, EV_RTO, f.fid)

    def _try_send(self, f: _Sender, now_ns: int) -> None:
        if not f.active(now_ns):
            return
        limit = allowed_in_flight(f.st)
        if self.cfg.max_cwnd is not None:
            limit = min(limit, int(self.cfg.max_cwnd))
        burst = MAX_BURST
        if f.in_recovery:
            # Window inflation: each duplicate ACK confirms a departure,
            # so new data may replace it even though the cumulative edge
            # (and with it snd_nxt - snd_una) has not moved yet. Strictly
            # one-for-one while recovering: the episode means the queue
            # has no headroom, so never put in more than came out.
            limit += f.pipe_credit
            burst = 1
        while f.snd_nxt - f.snd_una < limit and burst > 0:
            self._send(f, f.snd_nxt, now_ns, retx=f.snd_nxt <= f.max_seq_sent)
            if f.snd_nxt > f.max_seq_sent:
                f.max_seq_sent = f.snd_nxt
            f.snd_nxt += 1
            burst -= 1

    def _retransmit(self, f: _Sender, seq: int, now_ns: int) -> None:
        # Fast retransmit bypasses the window check for a single segment.
        f.retx_done.add(seq)
        self._send(f, seq, now_ns, retx=True)

    def _drain_hole(self, f: _Sender, now_ns: int) -> bool:
        # Resend the oldest known-dropped segment not yet repaired. Each
        # arriving ACK signals a departure, so one per ACK cannot grow
        # the queue.
        while f.pending_holes:
            s = f.pending_holes.popleft()
            if s >= f.snd_una and s not in f.retx_done:
                self._retransmit(f, s, now_ns)
                return True
        return False

    # ------------------------------------------------------- bottleneck

    def _bn_start_service(self, now_ns: int) -> None:
        # The packet leaves the buffer when its transmission starts;
        # capacity bounds only the packets still waiting.
        self.bn_in_service = self.bn_queue.items.popleft()
        start = max(now_ns, self.bn_busy_until_ns)
        done = start + self.ser_bn_ns
        self.bn_busy_until_ns = done
        self.bn_busy = True
        self.events.push(done, EV_BN_TX_DONE)

    def _on_bn_arrival(self, pkt: Packet, now_ns: int) -> None:
        if enqueue_droptail(self.bn_queue, pkt):
            if not self.bn_busy:
                self._bn_start_service(now_ns)
        else:
            self.flows[pkt.flow].counters.qdrop += 1

    def _on_bn_tx_done(self, now_ns: int) -> None:
        pkt = self.bn_in_service
        self.bn_in_service = None
        if maybe_drop_error(self.rng, self.cfg.bottleneck.per):
            self.flows[pkt.flow].counters.edrop += 1
        else:
            self._deliver(pkt, now_ns)
        if self.bn_queue.items:
            self._bn_start_service(now_ns)
        else:
            self.bn_busy = False

    # --------------------------------------------------------- receiver

    def _deliver(self, pkt: Packet, done_ns: int) -> None:
        f = self.flows[pkt.flow]
        c = f.counters
        c.recv += 1
        seq = pkt.seq
        if seq == f.rcv_nxt:
            c.recv_unique += 1
            f.rcv_nxt += 1
            while f.rcv_nxt in f.ooo:
                f.ooo.remove(f.rcv_nxt)
                f.rcv_nxt += 1
        elif seq > f.rcv_nxt:
            if seq not in f.ooo:
                f.ooo.add(seq)
                c.recv_unique += 1
        # else: below the cumulative edge, pure duplicate
        ack_time = done_ns + self.rx_extra_ns + self.ack_delay_ns
        self.events.push(
            ack_time,
            EV_ACK_ARRIVAL,
            (pkt.flow, f.rcv_nxt, pkt.seq, pkt.sent_at_ns, pkt.retransmission),
        )

    # ------------------------------------------------------------ sender

    def _update_rto(self, f: _Sender, sample: float) -> None:
        if f.srtt is None:
            f.srtt = sample
            f.rttvar = sample / 2.0
        else:
            f.rttvar = 0.75 * f.rttvar + 0.25 * abs(f.srtt - sample)
            f.srtt = 0.875 * f.srtt + 0.125 * sample
        f.rto = min(f.srtt + max(4.0 * f.rttvar, RTO_FLOOR), RTO_CEILING)
        f.backoff = 1

    def _sample_trace(self, f: _Sender, now_ns: int) -> None:
        if now_ns >= f.next_trace_ns:
            t = now_ns / NS
            f.cwnd_series.append((t, f.st.cwnd, f.st.phase.value))
            if f.st.rtt.has_sample:
                f.rtt_series.append((t, f.st.rtt.current))
            while f.next_trace_ns <= now_ns:
                f.next_trace_ns += self.trace_interval_ns

    def _on_ack(self, payload, now_ns: int) -> None:
        fid, ackno, echo_seq, echo_sent_ns, echo_retx = payload
        f = self.flows[fid]
        now_s = now_ns / NS
        if not echo_retx and echo_seq > f.max_echo:
            # Originals deliver in send order, so anything between the
            # previous original echo and this one was dropped. The
            # cumulative edge itself is excluded: fast retransmit owns it.
            lo = max(f.max_echo + 1, f.snd_una + 1)
            for s in range(lo, echo_seq):
                if s not in f.retx_done:
                    f.pending_holes.append(s)
            f.max_echo = echo_seq
        if ackno > f.snd_una:
            newly = ackno - f.snd_una
            f.snd_una = ackno
            if f.snd_nxt < f.snd_una:
                # Old in-flight data from before a go-back covered new
                # sequence space.
                f.snd_nxt = f.snd_una
            f.dup_count = 0
            repaired = False
            if not echo_retx:
                sample = (now_ns - echo_sent_ns) / NS
                self._update_rto(f, sample)
                f.counters.rtt_sum += sample
                f.counters.rtt_count += 1
            if f.in_recovery and ackno <= f.recover:
                # Partial ACK: the cumulative edge stopped on another
                # hole. Usually its repair is already in flight; if not,
                # resend it now. All but one of the newly acked packets
                # were already counted as duplicates, so deflate the
                # inflation credit by that much.
                if f.snd_una not in f.retx_done:
                    self._retransmit(f, f.snd_una, now_ns)
                    repaired = True
                else:
                    repaired = self._drain_hole(f, now_ns)
                f.pipe_credit = max(0, f.pipe_credit - (newly - 1))
                f.edge_retx_ns = now_ns
                f.rto_deadline_ns = now_ns + _ns(f.rto * f.backoff)
            else:
                if f.in_recovery:
                    f.in_recovery = False
                    f.retx_done.clear()
                    f.pending_holes.clear()
                    f.pipe_credit = 0
                f.cca.dispatch(
                    f.st,
                    AckNew(
                        send_time=echo_sent_ns / NS,
                        now=now_s,
                        acked=newly,
                        rtt_sample_valid=not echo_retx,
                    ),
                )
                if f.snd_nxt > f.snd_una:
                    f.rto_deadline_ns = now_ns + _ns(f.rto * f.backoff)
            if not repaired:
                self._try_send(f, now_ns)
        elif ackno == f.snd_una and f.snd_nxt > f.snd_una:
            f.dup_count += 1
            repaired = False
            if f.in_recovery:
                # The controller already reacted this episode; duplicates
                # now pace hole repair and inflate the send window, one
                # packet out per duplicate in. If the edge retransmission
                # itself died (it left during the same overload that
                # caused the episode) the stream of duplicates keeps
                # arriving while the edge stands still: resend it once
                # per smoothed RTT rather than waiting out the timer.
                f.pipe_credit += 1
                if (
                    f.srtt is not None
                    and now_ns - f.edge_retx_ns > _ns(f.srtt)
                ):
                    f.edge_retx_ns = now_ns
                    self._send(f, f.snd_una, now_ns, retx=True)
                    repaired = True
                else:
                    repaired = self._drain_hole(f, now_ns)
            elif f.snd_una > f.recover:
                before = f.st.cwnd
                f.cca.dispatch(f.st, AckDup(count=f.dup_count))
                if f.dup_count == 3:
                    f.decreases.append((now_s, before, f.st.cwnd, "dupack"))
                    f.in_recovery = True
                    f.recover = f.snd_nxt - 1
                    f.retx_done.clear()
                    f.edge_retx_ns = now_ns
                    f.pipe_credit = f.dup_count
                    self._retransmit(f, f.snd_una, now_ns)
                    repaired = True
            # else: duplicates for data resent after a timeout; the
            # receiver already held most of it, so these runs signal no
            # fresh congestion event (classic go-back ambiguity).
            if not repaired:
                self._try_send(f, now_ns)
        self._sample_trace(f, now_ns)

    def _on_rto(self, fid: int, now_ns: int) -> None:
        f = self.flows[fid]
        if f.snd_nxt == f.snd_una:
            f.timer_armed = False
            return
        if now_ns < f.rto_deadline_ns:
            # Re-armed since this event was scheduled.
            self.events.push(f.rto_deadline_ns, EV_RTO, fid)
            return
        before = f.st.cwnd
        f.cca.dispatch(f.st, LossTimeout())
        f.decreases.append((now_ns / NS, before, f.st.cwnd, "timeout"))
        f.counters.timeouts += 1
        f.in_recovery = False
        f.dup_count = 0
        f.retx_done.clear()
        f.pending_holes.clear()
        f.pipe_credit = 0
        # Everything below the highest sequence sent so far is being
        # resent wholesale; duplicate-ACK runs inside that range must not
        # be mistaken for new loss events.
        f.recover = f.max_seq_sent
        # Go-back: resend from the cumulative edge.
        f.snd_nxt = f.snd_una
        f.backoff = min(f.backoff * 2, RTO_MAX_BACKOFF)
        f.rto_deadline_ns = now_ns + _ns(f.rto * f.backoff)
        self.events.push(f.rto_deadline_ns, EV_RTO, fid)
        self._try_send(f, now_ns)
        self._sample_trace(f, now_ns)

    # -------------------------------------------------------------- run

    def run(self) -> RunTrace:
        for f in self.flows.values():
            self.events.push(f.start_ns, EV_FLOW_START, f.fid)
        heap = self.events.heap
        while heap:
            t_ns, _, kind, payload = heap[0]
            if t_ns > self.duration_ns:
                break
            heapq.heappop(heap)
            if kind == EV_ACK_ARRIVAL:
                self._on_ack(payload, t_ns)
            elif kind == EV_BN_ARRIVAL:
                self._on_bn_arrival(payload, t_ns)
            elif kind == EV_BN_TX_DONE:
                self._on_bn_tx_done(t_ns)
            elif kind == EV_RTO:
                self._on_rto(payload, t_ns)
            elif kind == EV_FLOW_START:
                f = self.flows[payload]
                self._sample_trace(f, t_ns)
                self._try_send(f, t_ns)
        return self._finish()

    def _finish(self) -> RunTrace:
        # Packets still on the wire or queued count as in-pipe.
        in_pipe = {fid: 0 for fid in self.flows}
        for entry in self.events.heap:
            if entry[2] == EV_BN_ARRIVAL:
                in_pipe[entry[3].flow] += 1
        for pkt in self.bn_queue.items:
            in_pipe[pkt.flow] += 1
        if self.bn_in_service is not None:
            in_pipe[self.bn_in_service.flow] += 1
        trace = RunTrace(
            duration=self.cfg.duration,
            packet_size=self.cfg.packet_size,
            seed=self.cfg.seed,
        )
        for fid, f in sorted(self.flows.items()):
            f.counters.in_pipe_end = in_pipe[fid]
            trace.flows[fid] = f.counters
            trace.cwnd_series[fid] = f.cwnd_series
            trace.rtt_series[fid] = f.rtt_series
            trace.decreases[fid] = f.decreases
        return trace


def run_scenario(config: ScenarioConfig) -> RunTrace:
    """Simulate one scenario and return its trace."""
    return Simulation(config).run()
