#!/usr/bin/env python3
"""Desk-scale sweeps of every experiment kind plus one combined analysis report.

The schedule stops at n = 32 by default; beyond that a single search settles
hundreds of thousands of vertices (see exploration_growth.py).
"""

import argparse
import json
import time
from pathlib import Path

from fpplab.analysis import analyze_records, write_summary_csv
from fpplab.experiments import ExperimentConfig, dataset_filename, run_sweep, write_jsonl
from fpplab.weights import WeightSpec

RUNS = [
    dict(kind="zline", graph="full"),
    dict(kind="zline", graph="dary"),
    dict(kind="coupled_pair", graph="dary"),
    dict(kind="pruned_b", graph="full", pruned_pairs=True),
    dict(kind="treeline", graph="full"),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--n", default="8,12,16,24,32")
    ap.add_argument("--replicas", type=int, default=400)
    ap.add_argument("--weights", default="shifted_exp(c=0.5,rate=1.0)")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", default="runs/desk")
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    weights = WeightSpec.parse(args.weights)
    schedule = tuple(int(x) for x in args.n.split(","))
    records = []
    for run in RUNS:
        cfg = ExperimentConfig(weights=weights, n_schedule=schedule, replicas=args.replicas,
                               master_seed=args.seed, **run)
        t0 = time.time()
        recs = run_sweep(cfg, jobs=args.jobs)
        name = f"{cfg.graph}_{dataset_filename(cfg)}"
        write_jsonl(recs, out / name)
        bad = sum(not r.ok for r in recs)
        print(f"{cfg.kind:>12} {cfg.graph:>4}: {len(recs)} trials, {bad} flagged, "
              f"{time.time() - t0:.1f} s -> {name}")
        records += recs

    report = analyze_records(records, weights, seed=args.seed)
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    write_summary_csv(report, out / "summary.csv")
    for kind, sec in report["kinds"].items():
        fits = sec["fits"]
        print(f"{kind}: mad model {fits.get('mad', {}).get('chosen', 'n/a')}, "
              f"|gamma| model {fits.get('edge_count', {}).get('chosen', 'n/a')}")


if __name__ == "__main__":
    main()
