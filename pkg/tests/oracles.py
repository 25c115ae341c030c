"""Reference computations that share no code with the search kernel."""

import math

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from fpplab.geodesic import canonical_path, path_weight
from fpplab.topology import Vertex, tree_distance


def ball(topo, oracle, center, radius, target=None):
    """Plain BFS over Topology.neighbors, weights from the oracle.

    With a target, vertices whose hop count from the center plus the
    product-graph lower bound to the target exceeds the radius are dropped.
    """
    index = {center: 0}
    frontier = [center]
    rows, cols, vals = [], [], []
    for depth in range(radius):
        nxt = []
        for v in frontier:
            for u, _ in topo.neighbors(v):
                if target is not None and depth + 1 + _hops_lb(u, target) > radius:
                    continue
                if u not in index:
                    index[u] = len(index)
                    nxt.append(u)
        frontier = nxt
    for v, i in index.items():
        for u, key in topo.neighbors(v):
            j = index.get(u)
            if j is not None and j > i:
                rows.append(i)
                cols.append(j)
                vals.append(oracle.weight(key))
    n = len(index)
    graph = coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    return index, graph


def _hops_lb(a, b):
    return tree_distance(a.word, b.word) + abs(a.z - b.z)


def reference_distance(topo, oracle, source: Vertex, target: Vertex) -> float:
    """scipy Dijkstra on the hop ellipse of size ceil(U / floor) around source and target."""
    upper = path_weight(oracle, canonical_path(source, target))
    radius = math.ceil(upper / oracle.spec.floor)
    index, graph = ball(topo, oracle, source, radius, target)
    dist = dijkstra(graph, directed=False, indices=index[source])
    return float(dist[index[target]])


def naive_mad(x):
    x = [float(v) for v in x]
    m = sum(x) / len(x)
    return sum(abs(v - m) for v in x) / len(x)


def naive_mean(x):
    return sum(float(v) for v in x) / len(x)


def ks_critical_001(n: int) -> float:
    """Asymptotic Kolmogorov-Smirnov critical value at level 0.001."""
    return math.sqrt(-0.5 * math.log(0.001 / 2)) / math.sqrt(n)


__all__ = ["ball", "reference_distance", "naive_mad", "naive_mean", "ks_critical_001", "np"]
