"""Watch one congestion window breathe.

Runs a single flow on the desk-scale path (10 Mbps, 100 ms, buffer equal
to the bandwidth-delay product, no random loss) and prints the window
trajectory plus every multiplicative decrease. The point of the exercise:
after each decrease the sqrt-weighted increase climbs back to the peak in
a few dozen round trips, where plain additive increase would need
thousands.

    python3 demos/01_window_dynamics.py [--cca elastic] [--duration 30]
"""
import argparse

from elasticsim import (
    FlowSchedule,
    Link,
    ScenarioConfig,
    epoch_rounds,
    run_scenario,
)

DESK = Link(rate=1e7, prop_delay=0.05, queue_capacity=125, per=0.0)


def sparkline(values, width=72):
    if not values:
        return ""
    lo, hi = min(values), max(values)
    span = (hi - lo) or 1.0
    marks = " .:-=+*#%@"
    step = max(1, len(values) // width)
    cells = [
        values[i : i + step] for i in range(0, len(values), step)
    ]
    return "".join(
        marks[int((sum(c) / len(c) - lo) / span * (len(marks) - 1))]
        for c in cells
    )


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cca", default="elastic")
    ap.add_argument("--duration", type=float, default=30.0)
    args = ap.parse_args()

    cfg = ScenarioConfig(
        bottleneck=DESK,
        flows=[FlowSchedule(flow_id=0, cca=args.cca)],
        duration=args.duration,
        seed=3,
    )
    trace = run_scenario(cfg)
    cwnds = [w for _, w, _ in trace.cwnd_series[0]]
    rtts = [r for _, r in trace.rtt_series[0]]
    c = trace.flows[0]

    print(f"{args.cca}: {args.duration:g} s on 10 Mbps / ~103 ms, buffer 125")
    print(f"cwnd  [{min(cwnds):6.1f} .. {max(cwnds):6.1f}] {sparkline(cwnds)}")
    if rtts:
        print(
            f"rtt   [{min(rtts)*1e3:6.1f} .. {max(rtts)*1e3:6.1f}] ms "
            f"{sparkline(rtts)}"
        )
    print(
        f"goodput {c.recv_unique * 8000 / args.duration / 1e6:.2f} Mbps, "
        f"drops {c.qdrop + c.edrop}, timeouts {c.timeouts}"
    )

    dec = trace.decreases[0]
    print(f"\n{len(dec)} multiplicative decreases:")
    for t, before, after, kind in dec[:12]:
        print(f"  t={t:7.2f}s  {before:7.1f} -> {after:7.1f}  ({kind})")
    if len(dec) > 12:
        print(f"  ... {len(dec) - 12} more")

    if len(dec) >= 2:
        gaps = [b[0] - a[0] for a, b in zip(dec, dec[1:])]
        mean_gap = sum(gaps) / len(gaps)
        print(f"\nmean recovery epoch: {mean_gap:.2f} s")
    for name in ("elastic", "newreno"):
        rounds = epoch_rounds(name, 125.0)
        print(f"oracle, {name:8s}: {rounds:4d} round trips from 62.5 to 125")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
