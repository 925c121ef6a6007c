"""The full experiment workflow, end to end.

Loads a TOML sweep description, runs every cell, and writes the result
set (runs.csv, summary.csv, per-run traces, manifest.json) exactly the
way the command line entry point does:

    elasticsim run --config configs/desk_grid.toml --out results/

This script does the same through the library API against the bundled
desk-scale grid and then prints the summary table it produced.

    python3 demos/05_experiment_matrix.py [--out demo_results]
"""
import argparse
import csv
import pathlib

from elasticsim import emit, load_config, run_matrix

HERE = pathlib.Path(__file__).resolve().parent


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument(
        "--config", default=str(HERE.parent / "configs" / "desk_grid.toml")
    )
    ap.add_argument("--out", default="demo_results")
    args = ap.parse_args()

    matrix = load_config(args.config)
    cells = (
        len(matrix.cca_set)
        * len(matrix.buffer_sizes)
        * len(matrix.pers)
        * matrix.repetitions
    )
    print(
        f"{args.config}: {cells} cells "
        f"({len(matrix.cca_set)} algorithms x {len(matrix.buffer_sizes)} "
        f"buffers x {len(matrix.pers)} error rates x "
        f"{matrix.repetitions} reps)"
    )

    result = run_matrix(matrix)
    emit(result, args.out, matrix)
    print(f"wrote {len(result.rows)} runs to {args.out}/")
    for failure in result.failures:
        print(f"  FAILED cell: {failure}")

    with open(pathlib.Path(args.out) / "summary.csv") as fh:
        rows = list(csv.DictReader(fh))
    print(f"\n{'cca':8s} {'buffer':>7} {'per':>8} {'Mbps':>8} {'loss':>9}")
    for r in rows:
        print(
            f"{r['cca']:8s} {r['buffer_pkts']:>7} {r['per']:>8} "
            f"{float(r['throughput_mean']) / 1e6:>8.2f} "
            f"{float(r['loss_ratio_mean']):>9.5f}"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
