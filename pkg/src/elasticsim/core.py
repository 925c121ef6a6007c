"""Congestion control plugin contract and shared window machinery.

Algorithms plug in by subclassing :class:`CongestionControl` and overriding
``ca_step`` (the per-ACK congestion avoidance increase). Slow start, loss
reactions and the phase state machine are shared: SlowStart moves to
CongestionAvoidance on the first loss or when cwnd reaches ssthresh,
CongestionAvoidance moves to FastRecovery on the third duplicate ACK,
FastRecovery moves back to CongestionAvoidance on a new ACK, and any phase
falls back to SlowStart on a retransmission timeout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional

# Floor for the congestion window; also the post-timeout restart window.
MIN_CWND = 2.0

# Duplicate-ACK count that triggers fast retransmit / window reduction.
DUP_ACK_THRESHOLD = 3

# Sentinel for "no RTT sample yet"; mirrors a 31-bit max initializer.
RTT_UNSET = float(0x7FFFFFFF)


class Phase(Enum):
    SLOW_START = "slow_start"
    CONGESTION_AVOIDANCE = "congestion_avoidance"
    FAST_RECOVERY = "fast_recovery"


@dataclass
class RttState:
    """Lifetime RTT bookkeeping for one flow, in seconds.

    ``base`` only ever decreases (toward the propagation floor), ``max``
    only ever increases, and ``current`` is the latest raw sample. Before
    the first sample ``base`` holds :data:`RTT_UNSET` and ``max`` is 0.
    """

    base: float = RTT_UNSET
    max: float = 0.0
    current: float = 0.0

    @property
    def has_sample(self) -> bool:
        return self.max > 0.0


def update_rtt_bounds(rtt: RttState, send_time: float, now: float) -> RttState:
    """Fold the sample ``now - send_time`` into the flow's RTT bounds."""
    if now <= send_time:
        raise ValueError(
            f"malformed RTT sample: now={now} must exceed send_time={send_time}"
        )
    sample = now - send_time
    rtt.current = sample
    if sample < rtt.base:
        rtt.base = sample
    if sample > rtt.max:
        rtt.max = sample
    return rtt


@dataclass
class CcaState:
    """Mutable per-flow congestion control state.

    ``cwnd`` is real valued; fractional per-ACK gains accumulate and the
    integer sending permit is exposed via :func:`allowed_in_flight`.
    ``algo_params`` holds the algorithm-specific record (Cubic epoch
    anchors, C-TCP's delay window, and so on).
    """

    cwnd: float = MIN_CWND
    ssthresh: float = math.inf
    phase: Phase = Phase.SLOW_START
    rtt: RttState = field(default_factory=RttState)
    beta: float = 0.5
    dup_count: int = 0
    algo_params: Any = None


@dataclass(frozen=True)
class AckNew:
    """A cumulative ACK advancing the left window edge.

    ``rtt_sample_valid`` is cleared by the sender when the ACK was
    triggered by a retransmitted packet, whose timing must not feed the
    RTT bounds.
    """

    send_time: float
    now: float
    acked: int = 1
    rtt_sample_valid: bool = True


@dataclass(frozen=True)
class AckDup:
    """A duplicate ACK; ``count`` is the current consecutive-dup total."""

    count: int


@dataclass(frozen=True)
class LossTimeout:
    """Retransmission timer expiry."""


CcaEvent = Any  # AckNew | AckDup | LossTimeout


def allowed_in_flight(state: CcaState) -> int:
    """Integer sending permit derived from the real-valued window."""
    return int(math.floor(state.cwnd))


def slow_start_step(state: CcaState) -> CcaState:
    """One ACK worth of exponential growth; exits to CA at ssthresh."""
    state.cwnd += 1.0
    if state.cwnd >= state.ssthresh:
        state.phase = Phase.CONGESTION_AVOIDANCE
    return state


def multiplicative_decrease(state: CcaState, *, timeout: bool = False) -> CcaState:
    """Shared loss reaction.

    The reduced window max(MIN_CWND, beta * cwnd) becomes the new
    ssthresh. On a timeout the window restarts from MIN_CWND in
    SlowStart; on a duplicate-ACK loss the window drops to the reduced
    value and the phase follows the state machine (CA enters
    FastRecovery, SlowStart falls to CA on its first loss).
    """
    reduced = max(MIN_CWND, state.beta * state.cwnd)
    state.ssthresh = reduced
    if timeout:
        state.cwnd = MIN_CWND
        state.phase = Phase.SLOW_START
    else:
        state.cwnd = reduced
        if state.phase is Phase.CONGESTION_AVOIDANCE:
            state.phase = Phase.FAST_RECOVERY
        else:
            state.phase = Phase.CONGESTION_AVOIDANCE
    return state


class CongestionControl:
    """Base class all congestion control algorithms extend.

    Subclasses override :meth:`ca_step` and may override :meth:`on_loss`
    to snapshot state (for example the window at which the loss hit)
    before the shared multiplicative decrease runs.
    """

    name = "base"
    default_beta = 0.5

    def initial_params(self) -> Any:
        return None

    def fresh_state(
        self,
        beta: Optional[float] = None,
        ssthresh: float = math.inf,
        cwnd: float = MIN_CWND,
    ) -> CcaState:
        return CcaState(
            cwnd=cwnd,
            ssthresh=ssthresh,
            beta=self.default_beta if beta is None else beta,
            algo_params=self.initial_params(),
        )

    def ca_step(self, state: CcaState, event: AckNew) -> None:
        raise NotImplementedError

    def on_loss(self, state: CcaState) -> None:
        pass

    def dispatch(self, state: CcaState, event: CcaEvent) -> CcaState:
        """Route one event through the shared state machine.

        Pure in the sense that equal (state, event) inputs always produce
        equal outputs; the passed state object is updated in place and
        returned.
        """
        if isinstance(event, AckNew):
            if event.now < event.send_time:
                raise ValueError(
                    f"malformed AckNew: now={event.now} precedes "
                    f"send_time={event.send_time}"
                )
            state.dup_count = 0
            if state.phase is Phase.SLOW_START:
                slow_start_step(state)
            elif state.phase is Phase.CONGESTION_AVOIDANCE:
                if event.rtt_sample_valid and event.now > event.send_time:
                    update_rtt_bounds(state.rtt, event.send_time, event.now)
                if state.rtt.has_sample:
                    self.ca_step(state, event)
                # else: no usable RTT yet (first ACK after a recovery was
                # triggered by a retransmission); skip one growth step.
            else:  # FAST_RECOVERY ends on the first new ACK
                state.phase = Phase.CONGESTION_AVOIDANCE
                state.cwnd = max(MIN_CWND, state.ssthresh)
            return state

        if isinstance(event, AckDup):
            state.dup_count = event.count
            if (
                event.count == DUP_ACK_THRESHOLD
                and state.phase is not Phase.FAST_RECOVERY
            ):
                self.on_loss(state)
                multiplicative_decrease(state)
            return state

        if isinstance(event, LossTimeout):
            self.on_loss(state)
            multiplicative_decrease(state, timeout=True)
            state.dup_count = 0
            return state

        raise TypeError(f"unknown congestion control event: {event!r}")


# Name -> class registry. Implementations self-register on import and
# external algorithms can call register_cca with their own subclass.
CCA_REGISTRY: dict = {}

_ALIASES = {
    "new-reno": "newreno",
    "reno": "newreno",
    "c-tcp": "ctcp",
    "compound": "ctcp",
    "agile-sd": "agile",
    "agilesd": "agile",
    "elastic-tcp": "elastic",
}


def register_cca(cls):
    """Register a CongestionControl subclass under its ``name``."""
    CCA_REGISTRY[cls.name] = cls
    return cls


def make_cca(name: str) -> CongestionControl:
    """Instantiate a registered algorithm by (case-insensitive) name."""
    key = name.strip().lower()
    key = _ALIASES.get(key, key)
    if key not in CCA_REGISTRY:
        known = ", ".join(sorted(CCA_REGISTRY))
        raise KeyError(f"unknown congestion control {name!r}; known: {known}")
    return CCA_REGISTRY[key]()
