"""Exact first-passage distances on the lazily generated graphs.

The search is best-first (bidirectional by default) with a potential built
from ``floor * graph_distance``, which is a lower bound on the remaining FPP
cost whenever every weight is at least ``floor``.  With ``floor == 0`` it is plain Dijkstra.  Either way the
returned distance is exact; if the settled-vertex budget runs out first the
call raises instead of returning an approximation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, TextIO

import numpy as np

from . import _kernel
from .topology import (
    EdgeKey,
    Topology,
    Vertex,
    LETTERS,
    canonical_edge_key,
    iter_ball,
    letter_index,
    straight_path,
    tree_path_between,
)
from .weights import WeightOracle, word_hash

DEFAULT_BUDGET = 5_000_000
METHODS = ("bidirectional", "astar", "dijkstra")

_VARIANT = {"full": _kernel.FULL, "dary": _kernel.DARY,
            "pruned": _kernel.PRUNED, "restricted": _kernel.RESTRICTED}


class BudgetExceeded(RuntimeError):
    def __init__(self, settled: int, message: str | None = None):
        super().__init__(message or f"budget exhausted after {settled} settled vertices")
        self.settled = settled


class FloorRequired(ValueError):
    pass


@dataclass(frozen=True)
class PathStats:
    edge_count: int
    tree_projection_size: int
    visits_word: dict = field(default_factory=dict)


@dataclass(frozen=True)
class GeodesicResult:
    distance: float
    path: list
    explored: int
    stats: PathStats
    upper_bound: float
    radius_bound: int | None

    @property
    def edges(self) -> list[EdgeKey]:
        return path_edges(self.path)


def path_edges(path: list[Vertex]) -> list[EdgeKey]:
    return [canonical_edge_key(a, b) for a, b in zip(path, path[1:])]


def path_weight(oracle: WeightOracle, edges: Iterable[EdgeKey]) -> float:
    # left-to-right accumulation, same order as the search accumulates g
    total = 0.0
    for e in edges:
        total += oracle.weight(e)
    return total


def path_stats(path: list[Vertex], watch: Iterable[str] = ()) -> PathStats:
    words = {v.word for v in path}
    visits = {w: any(x.startswith(w) for x in words) for w in watch}
    return PathStats(len(path) - 1, len(words), visits)


def canonical_path(source: Vertex, target: Vertex) -> list[EdgeKey]:
    """Feasible source->target route: tree path at the source layer, then a Z-run."""
    return (tree_path_between(source.z, source.word, target.word)
            + straight_path(source.z, target.z, target.word))


def _letters(word: str) -> np.ndarray:
    return np.array([letter_index(ch) for ch in word], dtype=np.int64)


def _decode_words(ids, parent, letter) -> list[str]:
    cache = {0: ""}

    def word(i):
        chain = []
        while i not in cache:
            chain.append(i)
            i = int(parent[i])
        w = cache[i]
        for j in reversed(chain):
            w += LETTERS[letter[j]]
            cache[j] = w
        return w

    return [word(int(i)) for i in ids]


def shortest_path(topo: Topology, oracle: WeightOracle, source: Vertex, target: Vertex,
                  budget: int = DEFAULT_BUDGET, watch: Iterable[str] = (),
                  method: str = "bidirectional") -> GeodesicResult:
    """Exact FPP distance and a geodesic from ``source`` to ``target``.

    ``method`` is ``bidirectional`` (default), ``astar`` (forward only) or
    ``dijkstra`` (no potential, no pruning).  All three return the same
    distance; they differ in how many vertices they settle.
    """
    if method not in METHODS:
        raise ValueError(f"method must be one of {', '.join(METHODS)}")
    topo.require(source)
    topo.require(target)
    spec = oracle.spec
    floor = spec.floor
    upper = path_weight(oracle, canonical_path(source, target))
    radius = math.ceil(upper / floor) if floor > 0 else None
    fam, p1, p2 = spec.kernel_params()
    I = np.int64
    status, dist, settled, pw, pz, parent, letter = _kernel.search(
        method == "bidirectional", I(topo.d), I(_VARIANT[topo.kind]), _letters(topo.word),
        np.uint64(oracle.key), I(fam), p1, p2, 0.0 if method == "dijkstra" else float(floor),
        _letters(source.word), I(source.z), _letters(target.word), I(target.z),
        I(budget), upper + 1e-9 * max(1.0, upper))
    if status == _kernel.BUDGET_EXCEEDED:
        raise BudgetExceeded(settled)
    if status != _kernel.OK:
        raise RuntimeError(f"no path within the upper bound {upper!r}")
    words = _decode_words(pw, parent, letter)
    path = [Vertex(w, int(z)) for w, z in zip(words, pz)]
    return GeodesicResult(float(dist), path, int(settled), path_stats(path, watch),
                          upper, radius)


@dataclass
class Ball:
    """An explicit finite piece of a topology: vertices and weighted edges."""

    vertices: list
    index: dict
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray


def materialize_ball(topo: Topology, oracle: WeightOracle, center: Vertex, radius: int) -> Ball:
    vertices = [v for v, _ in iter_ball(topo, center, radius)]
    index = {v: i for i, v in enumerate(vertices)}
    us, vs, ws = [], [], []
    for i, a in enumerate(vertices):
        for b, key in topo.neighbors(a):
            j = index.get(b)
            if j is not None and j > i:
                us.append(i)
                vs.append(j)
                ws.append(oracle.weight(key))
    return Ball(vertices, index, np.array(us, dtype=np.int64), np.array(vs, dtype=np.int64),
                np.array(ws, dtype=float))


def oracle_shortest_path(ball: Ball, source: Vertex, target: Vertex) -> float:
    """Exhaustive relaxation (Bellman-Ford, all edges per round) on an explicit graph."""
    s, t = ball.index[source], ball.index[target]
    dist = np.full(len(ball.vertices), np.inf)
    dist[s] = 0.0
    for _ in range(max(len(ball.vertices) - 1, 1)):
        new = dist.copy()
        np.minimum.at(new, ball.v, dist[ball.u] + ball.w)
        np.minimum.at(new, ball.u, dist[ball.v] + ball.w)
        if np.array_equal(new, dist):
            break
        dist = new
    return float(dist[t])


def ball_oracle_distance(topo: Topology, oracle: WeightOracle, source: Vertex,
                         target: Vertex) -> float:
    """Brute-force distance on the ball of radius ceil(U / floor) around the source."""
    floor = oracle.spec.floor
    if floor <= 0:
        raise FloorRequired("the ball oracle needs weights bounded below by a positive floor")
    upper = path_weight(oracle, canonical_path(source, target))
    radius = math.ceil(upper / floor)
    return oracle_shortest_path(materialize_ball(topo, oracle, source, radius), source, target)


def dump_path(path: Iterable[Vertex], fh: TextIO) -> None:
    for v in path:
        fh.write(v.encode() + "\n")
