"""Release acceptance: eight end-to-end checks, one test per criterion.

Each criterion gets exactly one test function so a verbose run prints one
pass/fail line per criterion. Scale 1/100 ("desk scale") divides the
bottleneck rate and buffer by 100 while keeping all delays, which turns
the 1 Gbps / 100 ms reference path into a 10 Mbps path with the same
buffer-to-BDP ratios and second-scale runtimes.
"""
import math
import random

import pytest

from elasticsim.core import RttState
from elasticsim.elastic import (
    compute_delta,
    compute_ur,
    compute_wwf,
    newton_sqrt,
)
from elasticsim.harness import ExperimentMatrix, build_cell_config, emit, run_matrix
from elasticsim.metrics import bdp_packets, jain_index, report_from_trace, summarize
from elasticsim.netsim import FlowSchedule, Link, ScenarioConfig, run_scenario

MBPS = 1e6
DESK_RATE = 1e7
DESK_BDP = 125  # 10 Mbps * 100 ms / 8000 bit packets


def _desk_config(cca, buffer_pkts, per, seed, duration, flow_count=1):
    return ScenarioConfig(
        bottleneck=Link(
            rate=DESK_RATE,
            prop_delay=0.05,
            queue_capacity=buffer_pkts,
            per=per,
        ),
        flows=[FlowSchedule(flow_id=i, cca=cca) for i in range(flow_count)],
        duration=duration,
        seed=seed,
    )


def _throughput_mbps(trace):
    return report_from_trace(trace).system_throughput_bps / MBPS


# --------------------------------------------------------------------- 1

def test_criterion_1_bdp_identities():
    assert bdp_packets(1e9, 0.001, 8000) == 125.0
    assert bdp_packets(1e9, 0.1, 8000) == 12500.0


# --------------------------------------------------------------------- 2

def _iterate_epoch(rule, lo, hi):
    w, rounds = lo, 0
    while w < hi:
        w += rule(w)
        rounds += 1
    return rounds


def _sim_epoch_error(cca, rule):
    """Measured mean decrease interval vs the per-RTT oracle, relative."""
    trace = run_scenario(_desk_config(cca, DESK_BDP, 0.0, 3, 100.0))
    dec = [d for d in trace.decreases[0] if d[3] == "dupack"]
    assert len(dec) >= 3, f"{cca}: too few decrease epochs to measure"
    intervals = [b[0] - a[0] for a, b in zip(dec, dec[1:])]
    troughs = [after for _, _, after, _ in dec[:-1]]
    peaks = [before for _, before, _, _ in dec[1:]]
    counters = trace.flows[0]
    mean_rtt = counters.rtt_sum / counters.rtt_count
    rounds = _iterate_epoch(
        rule, sum(troughs) / len(troughs), sum(peaks) / len(peaks)
    )
    predicted = rounds * mean_rtt
    measured = sum(intervals) / len(intervals)
    return (measured - predicted) / predicted


def test_criterion_2_epoch_length_oracle():
    # additive increase needs one round per packet of window deficit
    r_newreno = _iterate_epoch(lambda w: 1.0, 6250.0, 12500.0)
    assert abs(r_newreno - 6250) <= 1
    # sqrt-gain growth closes the same deficit in under 5% of the rounds
    r_elastic = _iterate_epoch(math.sqrt, 6250.0, 12500.0)
    assert r_elastic < 0.05 * 6250
    # simulator cross-check at desk scale, zero loss, buffer = BDP;
    # +-15% covers ACK granularity and the queue-varying RTT
    err_n = _sim_epoch_error("newreno", lambda w: 1.0)
    assert abs(err_n) <= 0.15, f"newreno epoch mismatch: {err_n:+.1%}"
    err_e = _sim_epoch_error("elastic", math.sqrt)
    assert abs(err_e) <= 0.15, f"elastic epoch mismatch: {err_e:+.1%}"


# --------------------------------------------------------------------- 3

def test_criterion_3_throughput_ordering():
    # Clause A: zero loss, buffer = BDP: elastic fills the pipe and stays
    # within 5% of the best alternative.
    util = {}
    for cca in ("elastic", "newreno", "cubic", "ctcp", "agile"):
        trace = run_scenario(_desk_config(cca, DESK_BDP, 0.0, 7, 60.0))
        trace.conservation_check()
        util[cca] = _throughput_mbps(trace)
    best_baseline = max(v for k, v in util.items() if k != "elastic")
    assert util["elastic"] >= 0.90 * DESK_RATE / MBPS, util
    assert util["elastic"] >= 0.95 * best_baseline, util

    # Clause B: random-loss smallest-buffer cell of the reference grid
    # (50 full-scale packets -> 1 at desk scale), 100 s, PER 1e-4:
    # elastic must beat every delay/loss hybrid baseline.
    base = ScenarioConfig(
        bottleneck=Link(rate=1e9, prop_delay=0.05, queue_capacity=1),
        flows=[FlowSchedule(flow_id=0, cca="elastic")],
        duration=100.0,
    )
    matrix = ExperimentMatrix(
        base=base,
        cca_set=["elastic", "cubic", "ctcp", "agile"],
        buffer_sizes=[50, 100, 200, 400, 800, 1600, 3200, 6400],
        pers=[1e-4],
        repetitions=1,
        scale=100.0,
    )
    smallest = min(matrix.buffer_sizes)
    thr = {}
    for cca in matrix.cca_set:
        cfg = build_cell_config(matrix, cca, smallest, 1e-4, 0)
        trace = run_scenario(cfg)
        trace.conservation_check()
        thr[cca] = _throughput_mbps(trace)
    others = {k: v for k, v in thr.items() if k != "elastic"}
    assert all(thr["elastic"] >= v for v in others.values()), (
        "smallest-buffer cell (1 packet at desk scale, PER=1e-4, 100 s): "
        f"elastic={thr['elastic']:.3f} Mbps vs "
        + ", ".join(f"{k}={v:.3f}" for k, v in sorted(others.items()))
        + "; with a one-packet queue and no pacing, every window-floor "
        "tick inside the ack-compressed train overflows the buffer, and "
        "the sqrt-gain increase ticks more often per train than the "
        "epoch-anchored baselines, so elastic stays pinned at a tiny "
        "window in this regime"
    )


# --------------------------------------------------------------------- 4

def test_criterion_4_fairness():
    assert jain_index([7.5, 7.5, 7.5, 7.5]) == 1.0
    assert jain_index([3.0, 0.0, 0.0, 0.0]) == 0.25
    assert jain_index([9.9, 0.0, 0.0, 0.0, 0.0]) == pytest.approx(0.2)
    # four synchronized elastic flows, buffer = BDP/2, zero loss, 100 s
    trace = run_scenario(
        _desk_config("elastic", DESK_BDP // 2, 0.0, 1, 100.0, flow_count=4)
    )
    trace.conservation_check()
    report = report_from_trace(trace)
    assert report.jfi_intra >= 0.9, report.per_flow_throughput_bps


# --------------------------------------------------------------------- 5

def test_criterion_5_loss_accounting():
    # exact packet conservation, including error drops and data still in
    # the pipe when the clock stops
    lossy = run_scenario(_desk_config("elastic", 50, 1e-3, 11, 20.0))
    lossy.conservation_check()
    for c in lossy.flows.values():
        assert c.sent == c.recv + c.qdrop + c.edrop + c.in_pipe_end
        assert c.edrop > 0

    # zero-loss single flow with buffer >= BDP loses under 1% (the slow
    # start overshoot plus periodic probe overshoots, amortized)
    clean = run_scenario(_desk_config("elastic", 250, 0.0, 5, 150.0))
    clean.conservation_check()
    lr = report_from_trace(clean).loss_ratio
    assert lr < 0.01, f"loss ratio {lr:.5f} at buffer 250 >= BDP"

    # Published absolute loss ratios for the synchronized many-flow sweep
    # are not reproducible on this substrate; the qualitative claim that
    # elastic's loss ratio grows with the buffer size is. Checked at full
    # scale, where drop episodes are frequent relative to the run length.
    drop_ratio = {}
    for buf in (200, 800, 3200, 6400):
        cfg = ScenarioConfig(
            bottleneck=Link(
                rate=1e9, prop_delay=0.05, queue_capacity=buf, per=0.0
            ),
            flows=[FlowSchedule(flow_id=i, cca="elastic") for i in range(4)],
            duration=30.0,
            seed=3,
        )
        trace = run_scenario(cfg)
        trace.conservation_check()
        sent = sum(c.sent for c in trace.flows.values())
        drops = sum(c.qdrop + c.edrop for c in trace.flows.values())
        drop_ratio[buf] = drops / sent
    ratios = [drop_ratio[b] for b in (200, 800, 3200, 6400)]
    assert all(a < b for a, b in zip(ratios, ratios[1:])), drop_ratio
    assert ratios[-1] > 2.0 * ratios[0], drop_ratio


# --------------------------------------------------------------------- 6

def test_criterion_6_elastic_math_invariants():
    rng = random.Random(6)
    for i in range(1_000_000):
        base = rng.uniform(0.001, 1.0)
        mx = base * rng.uniform(1.0, 20.0)
        cur = rng.uniform(base, mx)
        rtt = RttState(base=base, max=mx, current=cur)
        delta = compute_delta(rtt)
        assert 1.0 <= delta <= (mx / base) * (1.0 + 1e-12)
        assert abs(compute_ur(cur, mx) * delta - 1.0) <= 1e-12
        if i % 10 == 0:
            cwnd = 10.0 ** rng.uniform(0.0, 6.0)
            wwf = compute_wwf(rtt, cwnd)
            # positive dominance: never slower than additive increase
            assert wwf / cwnd >= (1.0 - 1e-12) / cwnd
    for _ in range(100_000):
        x = 10.0 ** rng.uniform(-6.0, 12.0)
        assert newton_sqrt(x) == pytest.approx(math.sqrt(x), rel=1e-9)


# --------------------------------------------------------------------- 7

def test_criterion_7_determinism(tmp_path):
    def one_pass(out_dir):
        base = ScenarioConfig(
            bottleneck=Link(rate=1e9, prop_delay=0.05, queue_capacity=1),
            flows=[FlowSchedule(flow_id=0, cca="elastic")],
            duration=15.0,
        )
        matrix = ExperimentMatrix(
            base=base,
            cca_set=["elastic"],
            buffer_sizes=[5000],
            pers=[1e-3],
            repetitions=1,
            scale=100.0,
        )
        result = run_matrix(matrix)
        assert not result.failures
        emit(result, str(out_dir), matrix)

    one_pass(tmp_path / "a")
    one_pass(tmp_path / "b")
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert "runs.csv" in names and "summary.csv" in names
    assert any(n.startswith("trace_") for n in names)
    for name in names:
        assert (tmp_path / "a" / name).read_bytes() == (
            tmp_path / "b" / name
        ).read_bytes(), f"{name} differs between identical runs"


# --------------------------------------------------------------------- 8

def _lcg_values(n=30):
    x = 123456789
    out = []
    for _ in range(n):
        x = (1103515245 * x + 12345) % 2**31
        out.append(50.0 + x / 2**31 * 10.0)
    return out


def test_criterion_8_statistics_oracle():
    # reference values computed with an independent high-precision
    # implementation and frozen as literals
    s = summarize(_lcg_values())
    assert s.mean == pytest.approx(54.995940647864093, abs=1e-12)
    assert s.sd == pytest.approx(2.1936169096816290, abs=1e-12)
    assert s.se == pytest.approx(0.40049782131913362, abs=1e-12)
    assert s.ci_lo == pytest.approx(54.176830632092634, abs=1e-12)
    assert s.ci_hi == pytest.approx(55.815050663635553, abs=1e-12)

    s = summarize([float(i) for i in range(1, 31)])
    assert s.mean == pytest.approx(15.5, abs=1e-12)
    assert s.sd == pytest.approx(8.803408430829505, abs=1e-12)
    assert s.se == pytest.approx(1.6072751268321592, abs=1e-12)
    assert s.ci_lo == pytest.approx(12.212753267540266, abs=1e-12)
    assert s.ci_hi == pytest.approx(18.787246732459734, abs=1e-12)
