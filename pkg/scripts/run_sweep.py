#!/usr/bin/env python3
"""Replicated simulation sweep over one scenario field, written as CSV.

    python scripts/run_sweep.py configs/fraction_sweep.json --reps 20 --out results/fraction.csv
    python scripts/run_sweep.py configs/size_sweep.json --reps 20 --out results/size.csv

``--rank`` also prints the Spearman correlation of each aggregate with the
swept value (needs scipy).
"""
import argparse
import csv
import io
import sys
import warnings
from dataclasses import replace
from pathlib import Path

from qosgame.cli import load_scenario
from qosgame.simkit import sweep

COLUMNS = ["value", "n_reps", "mean_satisfied", "min_satisfied", "max_satisfied",
           "mean_convergence_slots", "mean_updates"]


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("scenario")
    p.add_argument("--reps", type=int, default=20)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--n-users", type=int, help="override n_users when sweeping another field")
    p.add_argument("--out")
    p.add_argument("--rank", action="store_true")
    args = p.parse_args(argv)

    config, spec = load_scenario(args.scenario)
    if spec is None:
        sys.exit("scenario has no 'sweep' block")
    if args.n_users is not None and spec["field"] != "n_users":
        config = replace(config, n_users=args.n_users)

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    xs, sat, slots = [], [], []
    for value, s in sweep(config, spec["field"], spec["values"], args.reps, args.workers):
        w.writerow([value, s.n_reps, s.mean_satisfied, s.min_satisfied, s.max_satisfied,
                    s.mean_convergence_slots, s.mean_updates])
        xs.append(value)
        sat.append(s.mean_satisfied)
        slots.append(s.mean_convergence_slots)
        print(f"{spec['field']}={value}: satisfied {s.mean_satisfied:.2f}, "
              f"slots {s.mean_convergence_slots:.2f}", file=sys.stderr)

    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())

    if args.rank:
        from scipy.stats import spearmanr
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            for name, ys in (("mean_satisfied", sat), ("mean_convergence_slots", slots)):
                print(f"spearman({spec['field']}, {name}) = {spearmanr(xs, ys).statistic:.3f}",
                      file=sys.stderr)


if __name__ == "__main__":
    main()
