"""Do concurrent flows share the bottleneck evenly?

Two quick desk-scale experiments:

  synchronized -- four identical flows start together and split a
  10 Mbps link; Jain's index near 1 means an even four-way split.

  staggered    -- flows join and leave every 25 seconds, showing how
  fast newcomers claim their share back from incumbents.

    python3 demos/03_fairness.py [--cca elastic] [--flows 4]
"""
import argparse

from elasticsim import (
    FlowSchedule,
    Link,
    ScenarioConfig,
    jain_index,
    report_from_trace,
    run_scenario,
)


def bottleneck(buffer_pkts):
    return Link(rate=1e7, prop_delay=0.05, queue_capacity=buffer_pkts, per=0.0)


def show(trace, title):
    rep = report_from_trace(trace)
    print(title)
    for fid, bps in rep.per_flow_throughput_bps.items():
        c = trace.flows[fid]
        span = f"{c.start:g}-{c.stop:g}s"
        print(
            f"  flow {fid} [{span:>9}] {bps / 1e6:6.2f} Mbps over its "
            f"lifetime, drops {c.qdrop + c.edrop}"
        )
    print(f"  Jain index: {rep.jfi_intra:.4f}\n")


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cca", default="elastic")
    ap.add_argument("--flows", type=int, default=4)
    ap.add_argument("--duration", type=float, default=100.0)
    args = ap.parse_args()

    sync = ScenarioConfig(
        bottleneck=bottleneck(62),
        flows=[
            FlowSchedule(flow_id=i, cca=args.cca) for i in range(args.flows)
        ],
        duration=args.duration,
        seed=1,
    )
    show(run_scenario(sync), f"synchronized: {args.flows} x {args.cca}")

    stagger = args.duration / (args.flows + 1)
    seq = ScenarioConfig(
        bottleneck=bottleneck(125),
        flows=[
            FlowSchedule(
                flow_id=i,
                cca=args.cca,
                start=i * stagger,
                stop=args.duration - (args.flows - 1 - i) * stagger,
            )
            for i in range(args.flows)
        ],
        duration=args.duration,
        seed=1,
    )
    show(run_scenario(seq), f"staggered: one arrival every {stagger:g} s")

    print("reference points: equal shares ->", jain_index([1.0] * args.flows))
    print(
        "one flow hogging everything    ->",
        jain_index([1.0] + [0.0] * (args.flows - 1)),
    )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
