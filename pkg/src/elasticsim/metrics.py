"""Throughput, loss, fairness and summary statistics.

Throughput is goodput: unique delivered payload bits over the observation
window, so retransmitted duplicates never inflate it. The fairness index
is Jain's, which is 1 for perfectly equal shares and 1/n when one flow
takes everything.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

__all__ = [
    "bdp_packets",
    "flow_throughput",
    "system_throughput",
    "loss_ratio",
    "jain_index",
    "summarize",
    "SummaryStats",
    "MetricsReport",
    "report_from_trace",
]


def bdp_packets(bandwidth_bps: float, rtt_s: float, packet_size_bits: float) -> float:
    """Bandwidth-delay product expressed in packets."""
    if bandwidth_bps <= 0 or rtt_s <= 0 or packet_size_bits <= 0:
        raise ValueError(
            "bdp_packets needs positive bandwidth, rtt and packet size, got "
            f"({bandwidth_bps}, {rtt_s}, {packet_size_bits})"
        )
    return bandwidth_bps * rtt_s / packet_size_bits


def flow_throughput(delivered_bits: float, seconds: float) -> float:
    """Delivered payload bits over elapsed time."""
    if seconds <= 0:
        raise ValueError(f"observation window must be positive, got {seconds}")
    if delivered_bits < 0:
        raise ValueError(f"delivered_bits must be >= 0, got {delivered_bits}")
    return delivered_bits / seconds


def system_throughput(delivered_bits: list, seconds: float) -> float:
    """Aggregate throughput of all flows over a common window."""
    return flow_throughput(float(sum(delivered_bits)), seconds)


def loss_ratio(sent, received) -> float:
    """Fraction of sent packets that never arrived, over all flows."""
    if len(sent) != len(received):
        raise ValueError("sent and received need one entry per flow")
    total_sent = 0
    total_recv = 0
    for i, (s, r) in enumerate(zip(sent, received)):
        if r > s:
            raise ValueError(
                f"flow index {i}: received {r} exceeds sent {s}"
            )
        if s < 0:
            raise ValueError(f"flow index {i}: negative sent count {s}")
        total_sent += s
        total_recv += r
    if total_sent == 0:
        raise ValueError("loss ratio undefined when nothing was sent")
    return (total_sent - total_recv) / total_sent


def jain_index(shares) -> float:
    """Jain fairness (sum x)^2 / (n * sum x^2), in [1/n, 1]."""
    xs = list(shares)
    if not xs:
        raise ValueError("jain_index needs at least one share")
    if any(x < 0 for x in xs):
        raise ValueError("jain_index shares must be non-negative")
    sq = sum(x * x for x in xs)
    if sq == 0.0:
        raise ValueError("jain_index undefined when all shares are zero")
    s = sum(xs)
    return (s * s) / (len(xs) * sq)


@dataclass(frozen=True)
class SummaryStats:
    """Sample statistics with a Student-t 95% confidence interval."""

    n: int
    mean: float
    sd: float
    se: float
    ci_lo: float
    ci_hi: float


def summarize(values) -> SummaryStats:
    """Mean, sample SD, standard error and two-sided 95% CI.

    Needs at least two values; the interval uses the t quantile for
    n - 1 degrees of freedom, matching small replication counts.
    """
    xs = np.asarray(list(values), dtype=float)
    n = xs.size
    if n < 2:
        raise ValueError(f"summarize needs n >= 2 values, got {n}")
    mean = float(np.mean(xs))
    sd = float(np.std(xs, ddof=1))
    se = sd / math.sqrt(n)
    tq = float(stats.t.ppf(0.975, n - 1))
    return SummaryStats(
        n=int(n),
        mean=mean,
        sd=sd,
        se=se,
        ci_lo=mean - tq * se,
        ci_hi=mean + tq * se,
    )


@dataclass(frozen=True)
class MetricsReport:
    """Per-run metrics derived from a simulation trace."""

    per_flow_throughput_bps: dict
    system_throughput_bps: float
    loss_ratio: float
    jfi_intra: float
    jfi_rtt: float
    per_flow_mean_rtt: dict


def report_from_trace(trace) -> MetricsReport:
    """Compute the standard per-run metrics from a RunTrace."""
    per_flow = {}
    mean_rtt = {}
    sent = []
    recv = []
    bits_total = []
    for fid, c in sorted(trace.flows.items()):
        window = min(c.stop, trace.duration) - c.start
        bits = c.recv_unique * trace.packet_size * 8
        per_flow[fid] = flow_throughput(bits, window) if window > 0 else 0.0
        bits_total.append(bits)
        sent.append(c.sent)
        recv.append(c.recv)
        if c.rtt_count > 0:
            mean_rtt[fid] = c.rtt_sum / c.rtt_count
    sys_thr = system_throughput(bits_total, trace.duration)
    lr = loss_ratio(sent, recv)
    jfi_intra = jain_index(list(per_flow.values()))
    jfi_rtt = (
        jain_index(list(mean_rtt.values())) if mean_rtt else float("nan")
    )
    return MetricsReport(
        per_flow_throughput_bps=per_flow,
        system_throughput_bps=sys_thr,
        loss_ratio=lr,
        jfi_intra=jfi_intra,
        jfi_rtt=jfi_rtt,
        per_flow_mean_rtt=mean_rtt,
    )
