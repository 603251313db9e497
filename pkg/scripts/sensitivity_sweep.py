"""Sweep one configuration axis on the synthetic stream; writes a plot-ready CSV.

Default axes and values follow the sensitivity study: number of heuristic functions,
confidence threshold, chunk size and prototypes per function.
"""
import argparse
import csv
import sys

from streamlabel.config import RunConfig
from streamlabel.pipeline import SWEEP_AXES, sweep
from streamlabel.synthetic import GaussianScenario, generate

DEFAULT_VALUES = {
    "num_hf": [2, 4, 6, 8, 10, 14],
    "tau": [0.5, 0.6, 0.7, 0.8, 0.9],
    "chunk_size": [10, 20, 40, 80],
    "k_per_hf": [10, 20, 40, 60],
}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--axis", choices=SWEEP_AXES, default="num_hf")
    ap.add_argument("--values", help="comma-separated; defaults depend on the axis")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", help="CSV file (default stdout)")
    args = ap.parse_args(argv)

    cast = float if args.axis == "tau" else int
    values = [cast(v) for v in args.values.split(",")] if args.values else DEFAULT_VALUES[args.axis]
    data = generate(GaussianScenario(seed=args.seed))
    rows = sweep(data.labeled, data.stream, RunConfig(seed=args.seed), args.axis, values)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.DictWriter(out, list(rows[0]))
    w.writeheader()
    w.writerows(rows)
    if args.out:
        out.close()


if __name__ == "__main__":
    main()
