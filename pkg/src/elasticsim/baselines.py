"""Comparison congestion control algorithms: NewReno, Cubic, C-TCP, Agile-SD.

Each algorithm reuses the shared slow start and loss machinery from
:mod:`elasticsim.core` and differs only in its congestion avoidance
increase. BBR-style rate-based control is deliberately out of scope; a
custom algorithm can be added through :func:`elasticsim.core.register_cca`.
"""
from __future__ import annotations

from dataclasses import dataclass

from .core import (
    AckNew,
    CcaState,
    CongestionControl,
    MIN_CWND,
    register_cca,
)

__all__ = [
    "RenoParams",
    "CubicParams",
    "CtcpParams",
    "AgileParams",
    "reno_ca_step",
    "cubic_window",
    "ctcp_ca_step",
    "agile_ca_step",
    "NewReno",
    "Cubic",
    "CompoundTcp",
    "AgileSd",
]


# ---------------------------------------------------------------- NewReno

@dataclass
class RenoParams:
    alpha: float = 1.0


def reno_ca_step(state: CcaState, alpha: float = 1.0) -> CcaState:
    """Additive increase: one alpha per window of ACKs."""
    state.cwnd += alpha / state.cwnd
    return state


@register_cca
class NewReno(CongestionControl):
    name = "newreno"
    default_beta = 0.5

    def initial_params(self) -> RenoParams:
        return RenoParams()

    def ca_step(self, state: CcaState, event: AckNew) -> None:
        reno_ca_step(state, state.algo_params.alpha)


# ------------------------------------------------------------------ Cubic

@dataclass
class CubicParams:
    """Epoch anchors for the cubic growth curve.

    ``w_max`` is the window at the most recent loss and ``t_last_loss``
    the time it happened; both start at sentinel values until the first
    loss (or first CA ACK) anchors the epoch. ``cubic_beta`` is the
    fraction of the window removed on loss, so the window restarts from
    (1 - cubic_beta) * w_max, which is exactly the curve value at the
    loss time.
    """

    c_const: float = 0.4
    cubic_beta: float = 0.3
    w_max: float = 0.0
    t_last_loss: float = 0.0
    t_last_ack: float = 0.0


def cubic_window(params: CubicParams, t: float) -> float:
    """Target window C*(t - t_loss - K)^3 + w_max at absolute time t."""
    if params.w_max < MIN_CWND:
        raise ValueError("cubic_window needs an anchored epoch (w_max >= 2)")
    if t < params.t_last_loss:
        raise ValueError(
            f"t={t} precedes the epoch start {params.t_last_loss}"
        )
    k = (params.w_max * params.cubic_beta / params.c_const) ** (1.0 / 3.0)
    dt = t - params.t_last_loss - k
    return params.c_const * dt * dt * dt + params.w_max


@register_cca
class Cubic(CongestionControl):
    """Cubic growth toward (and past) the last loss window."""

    name = "cubic"
    # Multiplicative decrease keeps 1 - cubic_beta of the window.
    default_beta = 0.7

    def initial_params(self) -> CubicParams:
        return CubicParams()

    def ca_step(self, state: CcaState, event: AckNew) -> None:
        p = state.algo_params
        p.t_last_ack = event.now
        if p.w_max < MIN_CWND:
            # CA entered without a loss (configured ssthresh): anchor the
            # epoch here so the curve starts from the current window.
            p.w_max = max(MIN_CWND, state.cwnd)
            p.t_last_loss = event.now
        target = cubic_window(p, event.now)
        if target > state.cwnd:
            state.cwnd += (target - state.cwnd) / state.cwnd

    def on_loss(self, state: CcaState) -> None:
        p = state.algo_params
        p.w_max = max(MIN_CWND, state.cwnd)
        # Losses are signalled by ACK-clocked events, so the last ACK
        # arrival is the best available epoch timestamp.
        p.t_last_loss = p.t_last_ack


# ------------------------------------------------------------------ C-TCP

@dataclass
class CtcpParams:
    """Compound TCP: loss-based window plus a delay-based ``dwnd``.

    The total window state.cwnd is the sum of both; the loss component is
    recovered implicitly as cwnd - dwnd. ``vegas_delta`` is the queueing
    estimate (expected minus actual rate, scaled by the base RTT, in
    packets). While it stays under ``gamma`` the delay window grows
    binomially (alpha * W^k - 1 per RTT); once queueing is detected dwnd
    is cut by zeta * vegas_delta, at most once per RTT, and never below 0.
    """

    zeta: float = 0.1
    dwnd: float = 0.0
    vegas_delta: float = 0.0
    gamma: float = 30.0
    gain_alpha: float = 0.125
    gain_exp: float = 0.8
    drain_cooldown: int = 0


def ctcp_ca_step(state: CcaState) -> CcaState:
    """Per-ACK compound update of the loss and delay components."""
    p = state.algo_params
    total = state.cwnd
    # Repair any inconsistency after a timeout collapsed the total.
    if p.dwnd > total - 1.0:
        p.dwnd = max(0.0, total - 1.0)
    reno = total - p.dwnd
    rtt = state.rtt
    p.vegas_delta = total * (rtt.current - rtt.base) / rtt.current
    reno += 1.0 / total
    if p.vegas_delta < p.gamma:
        gain = p.gain_alpha * total ** p.gain_exp - 1.0
        if gain > 0.0:
            p.dwnd += gain / total
    elif p.drain_cooldown <= 0:
        p.dwnd = max(0.0, p.dwnd - p.zeta * p.vegas_delta)
        p.drain_cooldown = int(total)
    if p.drain_cooldown > 0:
        p.drain_cooldown -= 1
    state.cwnd = reno + p.dwnd
    return state


@register_cca
class CompoundTcp(CongestionControl):
    name = "ctcp"
    default_beta = 0.5

    def initial_params(self) -> CtcpParams:
        return CtcpParams()

    def ca_step(self, state: CcaState, event: AckNew) -> None:
        ctcp_ca_step(state)

    def on_loss(self, state: CcaState) -> None:
        # Scale dwnd with the shared decrease so both components shrink
        # proportionally.
        p = state.algo_params
        p.dwnd *= state.beta
        p.drain_cooldown = 0


# --------------------------------------------------------------- Agile-SD

@dataclass
class AgileParams:
    """Agility gain shaping for Agile-SD.

    ``lam`` is lambda_max right after a decrease and decays linearly to 1
    as the window climbs back toward the last loss window ``w_loss``;
    it never leaves [1, lambda_max].
    """

    lambda_max: float = 3.0
    lam: float = 1.0
    w_loss: float = 0.0


def agile_ca_step(state: CcaState) -> CcaState:
    """Additive increase scaled by the loss-distance driven lambda."""
    p = state.algo_params
    if p.w_loss < MIN_CWND:
        # No loss observed yet: probe at full agility.
        lam = p.lambda_max
    else:
        floor_w = state.beta * p.w_loss
        span = p.w_loss - floor_w
        if span <= 0.0:
            lam = 1.0
        else:
            progress = (state.cwnd - floor_w) / span
            progress = min(max(progress, 0.0), 1.0)
            lam = p.lambda_max * (1.0 - progress)
            lam = min(max(lam, 1.0), p.lambda_max)
    p.lam = lam
    state.cwnd += lam / state.cwnd
    return state


@register_cca
class AgileSd(CongestionControl):
    name = "agile"
    default_beta = 0.5

    def initial_params(self) -> AgileParams:
        return AgileParams()

    def ca_step(self, state: CcaState, event: AckNew) -> None:
        agile_ca_step(state)

    def on_loss(self, state: CcaState) -> None:
        p = state.algo_params
        p.w_loss = max(MIN_CWND, state.cwnd)
