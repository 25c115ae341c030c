#!/usr/bin/env python3
"""Settled vertices and wall time per search as n grows, for each search method.

Fits ln(settled) = a + r n and prints the growth rate r, which sets how far
the exact experiments can reach.
"""

import argparse
import time

import numpy as np

from fpplab.geodesic import METHODS, BudgetExceeded, shortest_path
from fpplab.topology import Topology, Vertex
from fpplab.weights import WeightOracle, WeightSpec, derive_seed


def target(kind, n):
    return Vertex("", n) if kind == "zline" else Vertex("0" * n, 0)


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--n", default="4,8,12,16,24,32")
    ap.add_argument("--trials", type=int, default=10)
    ap.add_argument("--graph", default="full", choices=["full", "dary"])
    ap.add_argument("--kind", default="zline", choices=["zline", "treeline"])
    ap.add_argument("--methods", default=",".join(METHODS))
    ap.add_argument("--weights", default="shifted_exp(c=0.5,rate=1.0)")
    ap.add_argument("--budget", type=int, default=2_000_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    spec = WeightSpec.parse(args.weights)
    topo = Topology(args.graph, 3)
    ns = [int(x) for x in args.n.split(",")]
    print(f"{'method':>14} {'n':>4} {'settled':>12} {'ms/search':>10}")
    for method in args.methods.split(","):
        pts = []
        for n in ns:
            settled, secs, over = [], [], 0
            for i in range(args.trials):
                oracle = WeightOracle(derive_seed(args.seed, "growth", n, i), spec)
                t0 = time.perf_counter()
                try:
                    res = shortest_path(topo, oracle, Vertex("", 0), target(args.kind, n),
                                        args.budget, method=method)
                except BudgetExceeded:
                    over += 1
                    continue
                secs.append(time.perf_counter() - t0)
                settled.append(res.explored)
            if not settled:
                print(f"{method:>14} {n:>4} {'> budget':>12}")
                break
            mean = float(np.mean(settled))
            pts.append((n, mean))
            note = f"  ({over} over budget)" if over else ""
            print(f"{method:>14} {n:>4} {mean:>12.0f} {1e3 * np.mean(secs):>10.1f}{note}")
        if len(pts) >= 2:
            x, y = np.array(pts).T
            rate, _ = np.polyfit(x, np.log(y), 1)
            print(f"{method:>14} growth rate {rate:.3f} per unit n")


if __name__ == "__main__":
    main()
