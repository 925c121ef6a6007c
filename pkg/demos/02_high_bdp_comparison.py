"""Head-to-head on a long fat path with random loss.

Reproduces the headline comparison: a single flow per algorithm on a
1 Gbps / 100 ms path (BDP = 12500 packets) with a shallow 50-packet
buffer and a packet error rate of 1e-4. Loss arrives far faster than an
additive-increase epoch completes, so algorithms whose growth slows near
the previous loss window (Cubic, Agile-SD) or whose delay component
backs off (C-TCP) leave most of the pipe idle, while the sqrt-weighted
increase keeps probing at full speed regardless of where the last loss
happened.

Full scale means real event counts: expect a couple of minutes.

    python3 demos/02_high_bdp_comparison.py [--duration 60] [--scale 1]

Pass --scale 100 for a quick desk-scale preview; note that with the
shallow buffer scaled down to a single packet the regime changes
completely and elastic no longer leads (see the notes in the README).
"""
import argparse
import time

from elasticsim import (
    FlowSchedule,
    Link,
    ScenarioConfig,
    report_from_trace,
    run_scenario,
)

CCAS = ("elastic", "cubic", "ctcp", "agile", "newreno")


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--duration", type=float, default=60.0)
    ap.add_argument("--scale", type=float, default=1.0)
    ap.add_argument("--per", type=float, default=1e-4)
    ap.add_argument("--buffer", type=int, default=50)
    args = ap.parse_args()

    buffer_pkts = max(1, round(args.buffer / args.scale))
    print(
        f"{1e9 / args.scale / 1e6:g} Mbps bottleneck, buffer {buffer_pkts} "
        f"packets, PER {args.per:g}, {args.duration:g} s per algorithm"
    )
    rows = []
    for cca in CCAS:
        cfg = ScenarioConfig(
            bottleneck=Link(
                rate=1e9 / args.scale,
                prop_delay=0.05,
                queue_capacity=buffer_pkts,
                per=args.per,
            ),
            flows=[FlowSchedule(flow_id=0, cca=cca)],
            duration=args.duration,
            seed=1,
        )
        t0 = time.time()
        trace = run_scenario(cfg)
        rep = report_from_trace(trace)
        c = trace.flows[0]
        rows.append(
            (
                cca,
                rep.system_throughput_bps / 1e6,
                rep.loss_ratio,
                c.edrop,
                c.qdrop,
                time.time() - t0,
            )
        )
        print(
            f"  {cca:8s} {rows[-1][1]:9.2f} Mbps  loss {rows[-1][2]:.5f} "
            f"(edrop {c.edrop}, qdrop {c.qdrop})  [{rows[-1][5]:.0f}s]"
        )

    rows.sort(key=lambda r: -r[1])
    print("\nranking:")
    for i, (cca, mbps, *_rest) in enumerate(rows, 1):
        bar = "#" * int(mbps / rows[0][1] * 40)
        print(f"  {i}. {cca:8s} {mbps:9.2f} Mbps {bar}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
