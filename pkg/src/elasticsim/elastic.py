"""Elastic-TCP: delay-sensitive congestion avoidance.

The algorithm treats the ratio of the current RTT to the largest RTT seen
as a utilization signal. When queues are empty (current RTT near the
propagation floor) the path is underused and the window-correlated
weighting function (WWF) grows the window quickly; as queueing delay
builds the weighting collapses toward plain additive increase. Per ACK in
congestion avoidance:

    delta = rtt_max / rtt_current        (1 <= delta <= rtt_max / rtt_base)
    wwf   = sqrt(delta * cwnd)
    cwnd += wwf / cwnd

Loss reactions are the shared multiplicative decrease from
:mod:`elasticsim.core`.
"""
from __future__ import annotations

from dataclasses import dataclass

from .core import (
    AckNew,
    CcaState,
    CongestionControl,
    RttState,
    register_cca,
    update_rtt_bounds,
)

__all__ = [
    "compute_ur",
    "compute_underutilization",
    "compute_delta",
    "compute_wwf",
    "newton_sqrt",
    "elastic_ca_step",
    "elastic_computation",
    "ElasticComputation",
    "ElasticTcp",
    "update_rtt_bounds",
]

# newton_sqrt converges quadratically; 60 iterations is far beyond what
# any double needs (worst observed is ~50 for the guess x at x ~ 1e12).
NEWTON_MAX_ITERS = 60


def newton_sqrt(x: float, tol: float = 1e-12) -> float:
    """Square root by Newton iteration on r^2 - x = 0.

    Initial guess is x itself for x >= 1, else 1, halving toward the root
    from above; iteration stops when |r^2 - x| <= tol * x, which keeps the
    relative error of the root near tol / 2 at every magnitude.
    """
    if x < 0.0:
        raise ValueError(f"newton_sqrt domain error: x={x} is negative")
    if x == 0.0:
        return 0.0
    r = x if x >= 1.0 else 1.0
    bound = tol * x
    for _ in range(NEWTON_MAX_ITERS):
        if abs(r * r - x) <= bound:
            break
        r = 0.5 * (r + x / r)
    return r


def compute_ur(rtt_current: float, rtt_max: float) -> float:
    """Utilization ratio rtt_current / rtt_max, in (0, 1]."""
    if rtt_current <= 0.0 or rtt_max <= 0.0:
        raise ValueError("utilization ratio needs positive RTT values")
    if rtt_current > rtt_max:
        raise ValueError(
            f"rtt_current={rtt_current} exceeds rtt_max={rtt_max}"
        )
    return rtt_current / rtt_max


def compute_underutilization(ur: float) -> float:
    """Spare-capacity fraction 1 - ur."""
    if not 0.0 < ur <= 1.0:
        raise ValueError(f"utilization ratio {ur} outside (0, 1]")
    return 1.0 - ur


def compute_delta(rtt: RttState) -> float:
    """Window weighting delta = rtt_max / rtt_current (the inverse UR).

    Bounded below by 1 (current can at most equal max) and above by
    rtt_max / rtt_base.
    """
    if not rtt.has_sample or rtt.current <= 0.0:
        raise ValueError("delta undefined before the first RTT sample")
    return rtt.max / rtt.current


def compute_wwf(rtt: RttState, cwnd: float) -> float:
    """Window-correlated weighting function sqrt(delta * cwnd).

    At least 1 whenever cwnd >= 1, so Elastic never grows slower than
    plain additive increase.
    """
    if cwnd < 1.0:
        raise ValueError(f"cwnd={cwnd} below the minimum window of 1")
    return newton_sqrt(compute_delta(rtt) * cwnd)


@dataclass(frozen=True)
class ElasticComputation:
    """One ACK's worth of intermediate values, for inspection and tests."""

    ur: float
    under_ur: float
    delta: float
    cwnd_est: float
    wwf: float


def elastic_computation(rtt: RttState, cwnd: float) -> ElasticComputation:
    """Evaluate every intermediate quantity for the given state."""
    ur = compute_ur(rtt.current, rtt.max)
    delta = compute_delta(rtt)
    return ElasticComputation(
        ur=ur,
        under_ur=compute_underutilization(ur),
        delta=delta,
        cwnd_est=delta * cwnd,
        wwf=compute_wwf(rtt, cwnd),
    )


def elastic_ca_step(state: CcaState) -> CcaState:
    """Per-ACK congestion avoidance increase cwnd += wwf / cwnd.

    Requires the RTT bounds to have been refreshed for this ACK.
    """
    wwf = compute_wwf(state.rtt, state.cwnd)
    state.cwnd += wwf / state.cwnd
    return state


@register_cca
class ElasticTcp(CongestionControl):
    """Elastic congestion control plugged into the shared machinery."""

    name = "elastic"
    default_beta = 0.5

    def ca_step(self, state: CcaState, event: AckNew) -> None:
        elastic_ca_step(state)
