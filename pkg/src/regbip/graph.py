"""
Simple undirected graphs on vertices 0..n-1, bipartitions, bipartite pieces
and decompositions.

All values are immutable after construction. Subgraphs produced by the
pipeline keep the host's vertex labels (they are spanning subgraphs with
isolated vertices); `induced_subgraph` is the one operation that relabels,
and it records the label map.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

import numpy as np

__all__ = [
    "Graph",
    "Bipartition",
    "BipartiteGraph",
    "Decomposition",
    "GraphFormatError",
    "norm_edge",
    "induced_subgraph",
    "restrict",
    "induced_bipartite",
    "degree_stats",
    "crossing_pair_count",
    "parse_edge_list",
    "format_edge_list",
    "read_edge_list",
    "write_edge_list",
]

Edge = tuple[int, int]


class GraphFormatError(ValueError):
    """Raised when an edge-list file is malformed; carries the line number."""

    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


def norm_edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


class Graph:
    """
    Simple graph on 0..n-1.

    `edges` is a sorted tuple of normalized pairs (u < v); `adj[v]` is the
    sorted neighbor tuple of v. `labels`, when set, maps local vertex i to its
    label in the graph this one was extracted from.
    """

    __slots__ = ("n", "edges", "adj", "labels", "_edge_set", "_deg")

    def __init__(self, n: int, edges: Iterable[Sequence[int]] = (), labels: Sequence[int] | None = None):
        if n < 0:
            raise ValueError("vertex count must be non-negative")
        es = set()
        for e in edges:
            u, v = int(e[0]), int(e[1])
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
            es.add(norm_edge(u, v))
        nbrs: list[list[int]] = [[] for _ in range(n)]
        for u, v in es:
            nbrs[u].append(v)
            nbrs[v].append(u)
        self.n = n
        self.edges: tuple[Edge, ...] = tuple(sorted(es))
        self.adj: tuple[tuple[int, ...], ...] = tuple(tuple(sorted(a)) for a in nbrs)
        self.labels = None if labels is None else tuple(int(x) for x in labels)
        self._edge_set = frozenset(es)
        self._deg = np.fromiter((len(a) for a in nbrs), dtype=np.int64, count=n)

    # -- queries ---------------------------------------------------------

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def edge_set(self) -> frozenset[Edge]:
        return self._edge_set

    def degree(self, v: int) -> int:
        return int(self._deg[v])

    def degrees(self) -> np.ndarray:
        return self._deg.copy()

    def has_edge(self, u: int, v: int) -> bool:
        return norm_edge(u, v) in self._edge_set

    def max_degree(self) -> int:
        return int(self._deg.max()) if self.n else 0

    def min_degree(self) -> int:
        return int(self._deg.min()) if self.n else 0

    def max_degree_on(self, vertices: Iterable[int]) -> int:
        idx = np.fromiter(vertices, dtype=np.int64)
        return int(self._deg[idx].max()) if idx.size else 0

    def min_degree_on(self, vertices: Iterable[int]) -> int:
        idx = np.fromiter(vertices, dtype=np.int64)
        return int(self._deg[idx].min()) if idx.size else 0

    def regular_degree(self) -> int | None:
        """Common degree if every vertex has the same degree, else None."""
        if self.n == 0:
            return 0
        lo, hi = self.min_degree(), self.max_degree()
        return lo if lo == hi else None

    def adjacency_matrix(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        if self.edges:
            e = np.asarray(self.edges)
            a[e[:, 0], e[:, 1]] = 1.0
            a[e[:, 1], e[:, 0]] = 1.0
        return a

    # -- construction of related graphs ----------------------------------

    def with_edges(self, edges: Iterable[Sequence[int]]) -> "Graph":
        return Graph(self.n, edges)

    def union(self, *others: "Graph") -> "Graph":
        es = set(self._edge_set)
        for o in others:
            es.update(o.edges)
        return Graph(self.n, es)

    def minus(self, *others: "Graph") -> "Graph":
        es = set(self._edge_set)
        for o in others:
            es.difference_update(o.edges)
        return Graph(self.n, es)

    def __eq__(self, other) -> bool:
        return isinstance(other, Graph) and self.n == other.n and self.edges == other.edges

    def __hash__(self) -> int:
        return hash((self.n, self.edges))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


@dataclass(frozen=True)
class Bipartition:
    """Two disjoint vertex sets. Neither side needs to cover the host."""

    left: frozenset[int]
    right: frozenset[int]

    def __init__(self, left: Iterable[int], right: Iterable[int]):
        lf, rf = frozenset(int(x) for x in left), frozenset(int(x) for x in right)
        if lf & rf:
            raise ValueError(f"bipartition sides overlap on {sorted(lf & rf)[:5]}")
        object.__setattr__(self, "left", lf)
        object.__setattr__(self, "right", rf)

    @property
    def vertices(self) -> frozenset[int]:
        return self.left | self.right

    def is_balanced(self) -> bool:
        return len(self.left) == len(self.right)

    def is_near_balanced(self) -> bool:
        return abs(len(self.left) - len(self.right)) <= 1

    def swapped(self) -> "Bipartition":
        return Bipartition(self.right, self.left)

    def side_of(self, v: int) -> int:
        """0 for left, 1 for right; KeyError if v is on neither side."""
        if v in self.left:
            return 0
        if v in self.right:
            return 1
        raise KeyError(v)

    def crosses(self, u: int, v: int) -> bool:
        return (u in self.left and v in self.right) or (u in self.right and v in self.left)

    def to_json(self) -> list[list[int]]:
        return [sorted(self.left), sorted(self.right)]


@dataclass(frozen=True)
class BipartiteGraph:
    """
    A graph together with a declared bipartition of (some of) its vertices.

    When the bipartition covers every host vertex this is a spanning
    bipartite piece; `degree` is the common degree if the graph is regular.
    """

    graph: Graph
    bipartition: Bipartition

    def __post_init__(self):
        bp = self.bipartition
        for u, v in self.graph.edges:
            if not bp.crosses(u, v):
                raise ValueError(f"edge ({u}, {v}) does not cross the bipartition")

    @property
    def host_n(self) -> int:
        return self.graph.n

    @property
    def edges(self) -> tuple[Edge, ...]:
        return self.graph.edges

    @property
    def is_spanning(self) -> bool:
        return len(self.bipartition.left) + len(self.bipartition.right) == self.graph.n

    @property
    def degree(self) -> int | None:
        return self.graph.regular_degree()

    def to_json(self) -> dict:
        return {
            "bipartition": self.bipartition.to_json(),
            "degree": self.degree,
            "edges": [list(e) for e in self.graph.edges],
        }


@dataclass(frozen=True)
class Decomposition:
    host: Graph
    pieces: tuple[BipartiteGraph, ...] = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.pieces)


# ---------------------------------------------------------------------------
# operations


def _check_vertices(g: Graph, s: Iterable[int]) -> list[int]:
    out = sorted(set(int(v) for v in s))
    if out and (out[0] < 0 or out[-1] >= g.n):
        bad = out[0] if out[0] < 0 else out[-1]
        raise ValueError(f"vertex {bad} out of range for n={g.n}")
    return out


def induced_subgraph(g: Graph, s: Iterable[int]) -> Graph:
    """G[s] relabeled to 0..|s|-1; `labels[i]` is the original label of i."""
    verts = _check_vertices(g, s)
    new = {v: i for i, v in enumerate(verts)}
    edges = [(new[u], new[v]) for u, v in g.edges if u in new and v in new]
    return Graph(len(verts), edges, labels=verts)


def restrict(g: Graph, s: Iterable[int]) -> Graph:
    """G[s] kept in host labels, as a spanning subgraph of g."""
    keep = set(_check_vertices(g, s))
    return Graph(g.n, [e for e in g.edges if e[0] in keep and e[1] in keep])


def induced_bipartite(g: Graph, bp: Bipartition) -> BipartiteGraph:
    """G[X, Y]: the edges of g with one endpoint on each side of bp."""
    _check_vertices(g, bp.vertices)
    return BipartiteGraph(Graph(g.n, [e for e in g.edges if bp.crosses(*e)]), bp)


def degree_stats(g: Graph) -> tuple[int, int, int]:
    """(min degree, max degree, edge count)."""
    return g.min_degree(), g.max_degree(), g.m


def crossing_pair_count(g: Graph, a: Iterable[int], b: Iterable[int]) -> int:
    """Number of ordered pairs (x, y) with xy an edge, x in a and y in b."""
    sa, sb = set(a), set(b)
    total = 0
    for x in sa:
        if 0 <= x < g.n:
            total += sum(1 for y in g.adj[x] if y in sb)
    return total


# ---------------------------------------------------------------------------
# edge-list text format: "n m" then m lines "u v"


def parse_edge_list(text: str | TextIO) -> Graph:
    lines = text.splitlines() if isinstance(text, str) else text.read().splitlines()
    it = ((i + 1, ln) for i, ln in enumerate(lines) if ln.strip())
    try:
        lineno, header = next(it)
    except StopIteration:
        raise GraphFormatError(1, "empty input, expected header 'n m'") from None
    parts = header.split()
    if len(parts) != 2:
        raise GraphFormatError(lineno, f"expected header 'n m', got {header.strip()!r}")
    try:
        n, m = int(parts[0]), int(parts[1])
    except ValueError:
        raise GraphFormatError(lineno, f"non-integer header {header.strip()!r}") from None
    if n < 1 or m < 0:
        raise GraphFormatError(lineno, "need n >= 1 and m >= 0")
    edges = []
    seen = set()
    for lineno, ln in it:
        parts = ln.split()
        if len(parts) != 2:
            raise GraphFormatError(lineno, f"expected 'u v', got {ln.strip()!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphFormatError(lineno, f"non-integer endpoint in {ln.strip()!r}") from None
        if not (0 <= u < n and 0 <= v < n):
            raise GraphFormatError(lineno, f"endpoint out of range 0..{n - 1}")
        if u == v:
            raise GraphFormatError(lineno, f"self-loop at {u}")
        e = norm_edge(u, v)
        if e in seen:
            raise GraphFormatError(lineno, f"duplicate edge {e}")
        seen.add(e)
        edges.append(e)
    if len(edges) != m:
        raise GraphFormatError(len(lines), f"header declares {m} edges, found {len(edges)}")
    return Graph(n, edges)


def format_edge_list(g: Graph) -> str:
    buf = io.StringIO()
    buf.write(f"{g.n} {g.m}\n")
    for u, v in g.edges:
        buf.write(f"{u} {v}\n")
    return buf.getvalue()


def read_edge_list(path) -> Graph:
    with open(path) as fh:
        return parse_edge_list(fh)


def write_edge_list(g: Graph, path) -> None:
    with open(path, "w") as fh:
        fh.write(format_edge_list(g))
