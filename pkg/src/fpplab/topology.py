"""Lazy addressing of T_d x Z, the rooted d-ary tree x Z, and their sub-variants.

A tree vertex is a *word*: the string of child indices read from the root
(``""`` is the root).  Letters are base-36 digits, so ``d`` is capped at 36.
Nothing here ever materializes a graph; everything is computed from words.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterator, NamedTuple

LETTERS = "0123456789abcdefghijklmnopqrstuvwxyz"
MAX_D = len(LETTERS)


class VertexNotInTopology(ValueError):
    pass


class NotAdjacent(ValueError):
    pass


class Vertex(NamedTuple):
    word: str
    z: int

    def encode(self) -> str:
        return f"{self.word}@{self.z}"

    @classmethod
    def decode(cls, text: str) -> "Vertex":
        word, sep, z = text.rpartition("@")
        if not sep:
            raise ValueError(f"not a vertex encoding: {text!r}")
        if any(ch not in LETTERS for ch in word):
            raise ValueError(f"bad tree word in {text!r}")
        return cls(word, int(z))

    def __str__(self) -> str:
        return self.encode()


ROOT = ""


class EdgeKind(enum.IntEnum):
    TREE = 0
    Z = 1


class EdgeKey(NamedTuple):
    """Canonical edge identity.

    Tree edges are anchored at their child endpoint, Z edges at the endpoint
    with the smaller Z-coordinate.
    """

    kind: EdgeKind
    anchor: Vertex

    def endpoints(self) -> tuple[Vertex, Vertex]:
        w, z = self.anchor
        if self.kind is EdgeKind.TREE:
            return Vertex(w[:-1], z), self.anchor
        return self.anchor, Vertex(w, z + 1)


def letter(i: int) -> str:
    return LETTERS[i]


def letter_index(ch: str) -> int:
    return LETTERS.index(ch)


def is_descendant(w: str, v: str) -> bool:
    """True iff ``v`` lies on the path from the root to ``w`` (``w`` included)."""
    return w.startswith(v)


def common_prefix_length(a: str, b: str) -> int:
    k = 0
    for x, y in zip(a, b):
        if x != y:
            break
        k += 1
    return k


def tree_distance(a: str, b: str) -> int:
    return len(a) + len(b) - 2 * common_prefix_length(a, b)


@dataclass(frozen=True)
class Topology:
    """Which graph is in force.

    ``kind`` is one of ``full`` (T_d x Z), ``dary`` (root has d-1 children),
    ``pruned`` (T_d minus the subtree at ``word``) and ``restricted`` (the
    subtree of T_d at ``word``).
    """

    kind: str
    d: int
    word: str = ROOT

    KINDS = ("full", "dary", "pruned", "restricted")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown topology kind {self.kind!r}")
        if not 3 <= self.d <= MAX_D:
            raise ValueError(f"d must be >= 3 (and <= {MAX_D}), got {self.d}")
        if self.kind in ("full", "dary") and self.word:
            raise ValueError(f"{self.kind} topology takes no word")
        if self.kind == "pruned" and not self.word:
            raise ValueError("pruned topology needs an excised vertex of depth >= 1")
        self.check_word(self.word)

    @classmethod
    def full(cls, d: int) -> "Topology":
        return cls("full", d)

    @classmethod
    def dary(cls, d: int) -> "Topology":
        return cls("dary", d)

    @classmethod
    def pruned(cls, d: int, v0: str) -> "Topology":
        return cls("pruned", d, v0)

    @classmethod
    def restricted(cls, d: int, anchor: str) -> "Topology":
        return cls("restricted", d, anchor)

    @property
    def k(self) -> int:
        """Depth of the excised (pruned) or anchor (restricted) vertex."""
        return len(self.word)

    def root_children(self) -> int:
        return self.d - 1 if self.kind == "dary" else self.d

    def n_children(self, word: str) -> int:
        return self.root_children() if not word else self.d - 1

    def is_tree_word(self, word: str) -> bool:
        """Whether ``word`` names a vertex of the ambient tree."""
        if not word:
            return True
        try:
            idx = [letter_index(ch) for ch in word]
        except ValueError:
            return False
        return idx[0] < self.root_children() and all(i < self.d - 1 for i in idx[1:])

    def check_word(self, word: str) -> None:
        # pruned/restricted sit inside T_d, full/dary words are validated as-is
        base = self if self.kind in ("full", "dary") else Topology.full(self.d)
        if not base.is_tree_word(word):
            raise ValueError(f"{word!r} is not a vertex of the tree (d={self.d})")

    def contains_word(self, word: str) -> bool:
        if self.kind in ("full", "dary"):
            return self.is_tree_word(word)
        if not Topology.full(self.d).is_tree_word(word):
            return False
        if self.kind == "pruned":
            return not word.startswith(self.word)
        return word.startswith(self.word)

    def contains(self, v: Vertex) -> bool:
        return self.contains_word(v.word)

    def require(self, v: Vertex) -> None:
        if not self.contains(v):
            raise VertexNotInTopology(f"{v.encode()} is not in {self}")

    def neighbors(self, v: Vertex) -> list[tuple[Vertex, EdgeKey]]:
        """Adjacent in-topology vertices: parent, children ascending, z-1, z+1."""
        self.require(v)
        word, z = v
        out = []
        if word and not (self.kind == "restricted" and word == self.word):
            out.append((Vertex(word[:-1], z), EdgeKey(EdgeKind.TREE, v)))
        for i in range(self.n_children(word)):
            child = word + LETTERS[i]
            if self.kind == "pruned" and child == self.word:
                continue
            c = Vertex(child, z)
            out.append((c, EdgeKey(EdgeKind.TREE, c)))
        out.append((Vertex(word, z - 1), EdgeKey(EdgeKind.Z, Vertex(word, z - 1))))
        out.append((Vertex(word, z + 1), EdgeKey(EdgeKind.Z, v)))
        return out

    def __str__(self) -> str:
        if self.word:
            return f"{self.kind}(d={self.d}, word={self.word!r})"
        return f"{self.kind}(d={self.d})"


def canonical_edge_key(u: Vertex, v: Vertex) -> EdgeKey:
    if u.word == v.word:
        if abs(u.z - v.z) != 1:
            raise NotAdjacent(f"{u.encode()} and {v.encode()}")
        return EdgeKey(EdgeKind.Z, u if u.z < v.z else v)
    if u.z != v.z:
        raise NotAdjacent(f"{u.encode()} and {v.encode()}")
    if len(v.word) == len(u.word) + 1 and v.word[:-1] == u.word:
        return EdgeKey(EdgeKind.TREE, v)
    if len(u.word) == len(v.word) + 1 and u.word[:-1] == v.word:
        return EdgeKey(EdgeKind.TREE, u)
    raise NotAdjacent(f"{u.encode()} and {v.encode()}")


def straight_path(from_z: int, to_z: int, word: str = ROOT) -> list[EdgeKey]:
    lo, hi = sorted((from_z, to_z))
    edges = [EdgeKey(EdgeKind.Z, Vertex(word, z)) for z in range(lo, hi)]
    return edges if from_z <= to_z else edges[::-1]


def tree_path(level_z: int, to_word: str) -> list[EdgeKey]:
    """Tree edges from the root down to ``to_word`` inside the layer ``level_z``."""
    return [EdgeKey(EdgeKind.TREE, Vertex(to_word[:i], level_z))
            for i in range(1, len(to_word) + 1)]


def tree_path_between(level_z: int, a: str, b: str) -> list[EdgeKey]:
    """Edges of the unique tree path from ``a`` to ``b`` in layer ``level_z``."""
    k = common_prefix_length(a, b)
    up = [EdgeKey(EdgeKind.TREE, Vertex(a[:i], level_z)) for i in range(len(a), k, -1)]
    down = [EdgeKey(EdgeKind.TREE, Vertex(b[:i], level_z)) for i in range(k + 1, len(b) + 1)]
    return up + down


def path_vertices(source: Vertex, edges: list[EdgeKey]) -> list[Vertex]:
    """Walk ``edges`` from ``source``; raises NotAdjacent if they do not chain."""
    out = [source]
    cur = source
    for e in edges:
        a, b = e.endpoints()
        if cur == a:
            cur = b
        elif cur == b:
            cur = a
        else:
            raise NotAdjacent(f"edge {e} does not touch {cur.encode()}")
        out.append(cur)
    return out


def iter_ball(topo: Topology, center: Vertex, radius: int) -> Iterator[tuple[Vertex, int]]:
    """Breadth-first (vertex, hop distance) pairs within graph radius ``radius``."""
    topo.require(center)
    seen = {center}
    frontier = [center]
    yield center, 0
    for r in range(1, radius + 1):
        nxt = []
        for v in frontier:
            for u, _ in topo.neighbors(v):
                if u not in seen:
                    seen.add(u)
                    nxt.append(u)
                    yield u, r
        frontier = nxt
