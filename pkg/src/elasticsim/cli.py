"""Command line front end.

    elasticsim run --config grid.toml --out results/
    elasticsim validate --config grid.toml
    elasticsim oracle epoch --cca elastic --wmax 12500 --beta 0.5
"""
from __future__ import annotations

import argparse
import sys

from .harness import emit, epoch_rounds, load_config, run_matrix


def _add_run(sub) -> None:
    p = sub.add_parser("run", help="run an experiment matrix")
    p.add_argument("--config", required=True, help="TOML experiment description")
    p.add_argument("--out", default="results", help="output directory")
    p.add_argument("--seed", type=int, help="override the base seed")
    p.add_argument("--reps", type=int, help="override the repetition count")
    p.add_argument("--scale", type=float, help="override the scale divisor")
    p.add_argument(
        "--cca", help="comma separated subset of algorithms to run"
    )
    p.add_argument(
        "--workers", type=int, default=1, help="parallel worker processes"
    )
    p.add_argument(
        "--no-traces",
        action="store_true",
        help="skip per-run cwnd trace files",
    )


def _add_validate(sub) -> None:
    p = sub.add_parser("validate", help="check a config file and exit")
    p.add_argument("--config", required=True)


def _add_oracle(sub) -> None:
    p = sub.add_parser("oracle", help="closed-form cross checks")
    osub = p.add_subparsers(dest="oracle_cmd", required=True)
    e = osub.add_parser(
        "epoch", help="brute-force recovery epoch length in RTT rounds"
    )
    e.add_argument("--cca", required=True)
    e.add_argument("--wmax", type=float, required=True)
    e.add_argument("--beta", type=float, default=0.5)
    e.add_argument("--rtt", type=float, default=0.1, help="seconds per round")
    e.add_argument("--alpha", type=float, default=1.0)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="elasticsim",
        description="Elastic-TCP simulator and experiment harness",
    )
    sub = parser.add_subparsers(dest="cmd", required=True)
    _add_run(sub)
    _add_validate(sub)
    _add_oracle(sub)
    args = parser.parse_args(argv)

    if args.cmd == "validate":
        matrix = load_config(args.config)
        cells = (
            len(matrix.cca_set)
            * len(matrix.buffer_sizes)
            * len(matrix.pers)
            * matrix.repetitions
        )
        print(f"{args.config}: ok ({cells} cells)")
        return 0

    if args.cmd == "run":
        matrix = load_config(args.config)
        if args.seed is not None:
            matrix.seed_base = args.seed
        if args.reps is not None:
            matrix.repetitions = args.reps
        if args.scale is not None:
            matrix.scale = args.scale
        if args.cca:
            matrix.cca_set = [c.strip() for c in args.cca.split(",") if c.strip()]
        matrix.validate()
        result = run_matrix(
            matrix, workers=args.workers, keep_traces=not args.no_traces
        )
        emit(result, args.out, matrix)
        print(
            f"wrote {len(result.rows)} runs, {len(result.summaries)} summaries "
            f"to {args.out}"
        )
        if result.failures:
            print(f"{len(result.failures)} cells failed:", file=sys.stderr)
            for f in result.failures:
                print(f"  {f}", file=sys.stderr)
            return 1
        return 0

    if args.cmd == "oracle" and args.oracle_cmd == "epoch":
        rounds = epoch_rounds(
            args.cca.strip().lower(),
            wmax=args.wmax,
            beta=args.beta,
            rtt=args.rtt,
            alpha=args.alpha,
        )
        print(
            f"cca={args.cca} wmax={args.wmax:g} beta={args.beta:g} "
            f"rounds={rounds}"
        )
        return 0

    parser.error("unknown command")
    return 2


if __name__ == "__main__":
    sys.exit(main())
