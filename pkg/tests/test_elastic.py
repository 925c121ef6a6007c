"""Elastic window mathematics: UR, delta, WWF, the per-ACK step."""
import math
import random

import pytest

from elasticsim.core import CcaState, Phase, RttState
from elasticsim.elastic import (
    compute_delta,
    compute_underutilization,
    compute_ur,
    compute_wwf,
    elastic_ca_step,
    elastic_computation,
    newton_sqrt,
)


@pytest.mark.parametrize(
    "cur,mx,expect",
    [(0.2, 0.2, 1.0), (0.1, 0.2, 0.5), (0.15, 0.2, 0.75)],
)
def test_ur_values(cur, mx, expect):
    assert compute_ur(cur, mx) == pytest.approx(expect, rel=1e-15)


def test_ur_rejects_bad_domain():
    with pytest.raises(ValueError):
        compute_ur(0.3, 0.2)
    with pytest.raises(ValueError):
        compute_ur(0.0, 0.2)
    with pytest.raises(ValueError):
        compute_ur(0.1, 0.0)


@pytest.mark.parametrize("ur,expect", [(1.0, 0.0), (0.5, 0.5), (0.75, 0.25)])
def test_underutilization(ur, expect):
    assert compute_underutilization(ur) == expect


def test_underutilization_domain():
    with pytest.raises(ValueError):
        compute_underutilization(0.0)
    with pytest.raises(ValueError):
        compute_underutilization(1.5)


def test_delta_boundary_values():
    assert compute_delta(RttState(base=0.1, max=0.2, current=0.2)) == 1.0
    assert compute_delta(RttState(base=0.1, max=0.2, current=0.1)) == 2.0
    assert compute_delta(RttState(base=0.1, max=0.2, current=0.16)) == \
        pytest.approx(1.25)


def test_delta_needs_a_sample():
    with pytest.raises(ValueError):
        compute_delta(RttState())


def test_wwf_spot_values():
    flat = RttState(base=0.1, max=0.2, current=0.2)
    assert compute_wwf(flat, 100.0) == pytest.approx(10.0, rel=1e-9)
    assert compute_wwf(flat, 1.0) == pytest.approx(1.0, rel=1e-9)
    fast = RttState(base=0.1, max=0.2, current=0.1)
    assert compute_wwf(fast, 100.0) == pytest.approx(math.sqrt(200.0), rel=1e-9)


def test_wwf_rejects_tiny_window():
    with pytest.raises(ValueError):
        compute_wwf(RttState(base=0.1, max=0.2, current=0.2), 0.5)


def test_newton_sqrt_exact_corners():
    assert newton_sqrt(0.0) == 0.0
    assert newton_sqrt(1.0) == 1.0
    assert newton_sqrt(2.0) == pytest.approx(math.sqrt(2.0), rel=1e-12)
    with pytest.raises(ValueError):
        newton_sqrt(-1.0)


def test_newton_sqrt_log_uniform_against_reference():
    rng = random.Random(7)
    for _ in range(20000):
        x = 10.0 ** rng.uniform(-6.0, 12.0)
        assert newton_sqrt(x) == pytest.approx(math.sqrt(x), rel=1e-9)


def test_ur_delta_product_is_one():
    rng = random.Random(13)
    for _ in range(20000):
        base = rng.uniform(1e-3, 1.0)
        mx = base * rng.uniform(1.0, 50.0)
        cur = rng.uniform(base, mx)
        rtt = RttState(base=base, max=mx, current=cur)
        assert compute_ur(cur, mx) * compute_delta(rtt) == pytest.approx(
            1.0, abs=1e-12
        )


def test_delta_bounds_randomized():
    rng = random.Random(17)
    for _ in range(20000):
        base = rng.uniform(1e-3, 1.0)
        mx = base * rng.uniform(1.0, 50.0)
        cur = rng.uniform(base, mx)
        d = compute_delta(RttState(base=base, max=mx, current=cur))
        assert 1.0 - 1e-12 <= d <= mx / base + 1e-12


def test_elastic_increment_dominates_reno():
    # sqrt(delta * w) / w >= 1 / w for any w >= 1, delta >= 1.
    rng = random.Random(23)
    for _ in range(20000):
        w = rng.uniform(1.0, 1e6)
        delta = rng.uniform(1.0, 40.0)
        base = 0.1
        cur = 0.1 * rng.uniform(1.0, 3.0)
        rtt = RttState(base=base, max=cur * delta, current=cur)
        inc = compute_wwf(rtt, w) / w
        assert inc >= 1.0 / w


def test_ca_step_spot_values():
    st = CcaState(cwnd=100.0, rtt=RttState(base=0.1, max=0.2, current=0.2))
    elastic_ca_step(st)
    assert st.cwnd == pytest.approx(100.1, rel=1e-9)

    st = CcaState(cwnd=1.0, rtt=RttState(base=0.1, max=0.1, current=0.1))
    elastic_ca_step(st)
    assert st.cwnd == pytest.approx(2.0, rel=1e-9)

    st = CcaState(cwnd=6250.0, rtt=RttState(base=0.1, max=0.1, current=0.1))
    elastic_ca_step(st)
    assert st.cwnd == pytest.approx(6250.0126491106, rel=1e-9)


def test_computation_record_is_consistent():
    rtt = RttState(base=0.1, max=0.25, current=0.2)
    comp = elastic_computation(rtt, 64.0)
    assert comp.ur + comp.under_ur == pytest.approx(1.0, abs=1e-15)
    assert comp.cwnd_est == pytest.approx(comp.delta * 64.0)
    assert comp.wwf == pytest.approx(math.sqrt(comp.cwnd_est), rel=1e-9)
    assert comp.delta >= 1.0
    assert comp.cwnd_est >= 64.0


def test_per_rtt_gain_is_convex_at_delta_one():
    # Iterating a full window of ACKs per round, the per-round gain
    # sequence must strictly increase (sqrt growth, convex-up ramp).
    st = CcaState(
        cwnd=4.0,
        phase=Phase.CONGESTION_AVOIDANCE,
        rtt=RttState(base=0.1, max=0.1, current=0.1),
    )
    gains = []
    for _ in range(25):
        start = st.cwnd
        for _ in range(int(start)):
            elastic_ca_step(st)
        gains.append(st.cwnd - start)
    assert all(b > a for a, b in zip(gains, gains[1:]))


def _rounds_sqrt(lo, hi):
    w, n = lo, 0
    while w < hi:
        w += math.sqrt(w)
        n += 1
    return n


@pytest.mark.parametrize(
    "target,expect_rounds", [(125, 7), (1250, 21), (12500, 66)]
)
def test_epoch_rounds_beat_additive(target, expect_rounds):
    # Brute-force iteration, frozen: rounds from W/2 to W under gain
    # sqrt(w), always far below the additive count of W/2 rounds.
    got = _rounds_sqrt(target / 2.0, float(target))
    assert got == expect_rounds
    assert got < target / 2.0
