"""
Edge-count surgery: proper (Delta+1)-edge-coloring, trimming a graph to an
exact edge count with controlled degree spread, and equal-size refinement of
two partitions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Hashable, Sequence

from .graph import BipartiteGraph, Graph, norm_edge

__all__ = [
    "EdgeColoring",
    "RefinementResult",
    "vizing_color",
    "m_edge_subgraph",
    "equal_size_refine",
    "split_by_refinement",
    "equalize_pieces",
]


@dataclass(frozen=True)
class EdgeColoring:
    colors: dict  # edge -> color in 0..k-1
    k: int

    def classes(self) -> list[list[tuple[int, int]]]:
        out: list[list] = [[] for _ in range(self.k)]
        for e, c in self.colors.items():
            out[c].append(e)
        for cls in out:
            cls.sort()
        return out

    def is_proper(self) -> bool:
        seen = set()
        for (u, v), c in self.colors.items():
            if (u, c) in seen or (v, c) in seen:
                return False
            seen.add((u, c))
            seen.add((v, c))
        return True


def vizing_color(g: Graph) -> EdgeColoring:
    """
    Proper edge coloring with at most Delta + 1 colors (Misra-Gries).

    Edges are inserted one at a time. An edge uv with no common free color
    is handled by building a maximal fan at u, flipping a c/d alternating
    path through u, and rotating a prefix of the fan.
    """
    ncol = g.max_degree() + 1
    at: list[dict[int, int]] = [dict() for _ in range(g.n)]  # vertex -> {color: neighbor}
    color: dict[tuple[int, int], int] = {}

    def free(v):
        a = at[v]
        for c in range(ncol):
            if c not in a:
                return c
        raise AssertionError("no free color; degree exceeds Delta")

    def is_free(v, c):
        return c not in at[v]

    def set_color(u, v, c):
        old = color.get(norm_edge(u, v))
        if old is not None:
            del at[u][old]
            del at[v][old]
        if c is None:
            color.pop(norm_edge(u, v), None)
            return
        color[norm_edge(u, v)] = c
        at[u][c] = v
        at[v][c] = u

    for u, v in g.edges:
        # maximal fan at u starting with v
        fan = [v]
        in_fan = {v}
        grew = True
        while grew:
            grew = False
            last = fan[-1]
            for c, x in at[u].items():
                if x not in in_fan and is_free(last, c):
                    fan.append(x)
                    in_fan.add(x)
                    grew = True
                    break
        c = free(u)
        d = free(fan[-1])
        if c != d:
            # flip the c/d path starting at u with its d-edge
            path = []
            x, want = u, d
            while want in at[x]:
                y = at[x][want]
                path.append((x, y, want))
                x = y
                want = c if want == d else d
            for x, y, col in path:
                set_color(x, y, None)
            for x, y, col in path:
                set_color(x, y, c if col == d else d)
        # first fan vertex where d is free; that prefix is still a fan
        w = next(i for i, x in enumerate(fan) if is_free(x, d) and _fan_prefix_ok(fan, i, u, at, color))
        for i in range(w):
            nxt = color[norm_edge(u, fan[i + 1])]
            set_color(u, fan[i + 1], None)
            set_color(u, fan[i], nxt)
        set_color(u, fan[w], d)
    return EdgeColoring(dict(sorted(color.items())), ncol)


def _fan_prefix_ok(fan, w, u, at, color) -> bool:
    for i in range(1, w + 1):
        c = color.get(norm_edge(u, fan[i]))
        if c is None or c in at[fan[i - 1]]:
            return False
    return True


def m_edge_subgraph(h: Graph, m: int) -> tuple[Graph, Graph]:
    """
    Split h into (h_prime, removed) with e(h_prime) = m.

    Color h with Delta+1 matchings, order the classes by size (largest
    first, lower color on ties) and remove whole classes from the front plus
    a prefix of one more class, e(h) - m edges in all. Guarantees
    (S1) Delta(h') - delta(h') <= Delta(h) - delta(h) + 2 and
    (S2) Delta(removed) <= (Delta(h) + 1)(e(h) - m)/e(h) + 1.
    """
    if not (1 <= m <= h.m):
        raise ValueError(f"m={m} outside 1..{h.m}")
    if m == h.m:
        return h, Graph(h.n)
    classes = vizing_color(h).classes()
    order = sorted(range(len(classes)), key=lambda c: (-len(classes[c]), c))
    need = h.m - m
    removed = []
    for c in order:
        take = classes[c][:need]
        removed += take
        need -= len(take)
        if need == 0:
            break
    rem = Graph(h.n, removed)
    return h.minus(rem), rem


@dataclass(frozen=True)
class RefinementResult:
    parts_a: list[frozenset]
    parts_b: list[frozenset]

    @property
    def t(self) -> int:
        return len(self.parts_a)


def equal_size_refine(
    p: Sequence, q: Sequence, key: Callable[[Hashable], object] | None = None
) -> RefinementResult:
    """
    Refine partitions p of A and q of B (|A| = |B|) into t <= |p| + |q| - 1
    blocks each, paired so that matched blocks have equal size.

    Repeatedly take a smallest remaining block (p before q, lowest index on
    ties), carve a block of the same size out of the first block on the other
    side (its smallest elements under `key`), and pair the two.
    """
    pa = [set(b) for b in p]
    qb = [set(b) for b in q]
    if not pa or not qb or any(not b for b in pa + qb):
        raise ValueError("partitions must be nonempty with nonempty blocks")
    if sum(map(len, pa)) != sum(map(len, qb)):
        raise ValueError("ground sets differ in size")
    if any(pa[i] & pa[j] for i in range(len(pa)) for j in range(i + 1, len(pa))) or any(
        qb[i] & qb[j] for i in range(len(qb)) for j in range(i + 1, len(qb))
    ):
        raise ValueError("blocks overlap")
    out_a, out_b = [], []
    while pa or qb:
        if len(pa) == 1 and len(qb) == 1:
            out_a.append(frozenset(pa.pop()))
            out_b.append(frozenset(qb.pop()))
            break
        sizes = [(len(b), 0, i) for i, b in enumerate(pa)] + [(len(b), 1, i) for i, b in enumerate(qb)]
        size, side, idx = min(sizes)
        small, other = (pa, qb) if side == 0 else (qb, pa)
        s = small.pop(idx)
        t = other[0]
        carved = set(sorted(t, key=key)[:size])
        t -= carved
        if not t:
            other.pop(0)
        if side == 0:
            out_a.append(frozenset(s))
            out_b.append(frozenset(carved))
        else:
            out_a.append(frozenset(carved))
            out_b.append(frozenset(s))
    return RefinementResult(out_a, out_b)


def split_by_refinement(
    pieces_a: Sequence[BipartiteGraph], pieces_b: Sequence[BipartiteGraph], r: RefinementResult
) -> tuple[list[BipartiteGraph], list[BipartiteGraph]]:
    """Cut the pieces along the refined edge sets; each output inherits its source's bipartition."""

    def cut(pieces, parts):
        owner = {}
        for i, pc in enumerate(pieces):
            for e in pc.edges:
                if e in owner:
                    raise ValueError(f"edge {e} appears in two pieces")
                owner[e] = i
        if sum(len(s) for s in parts) != len(owner):
            raise ValueError("refinement does not cover the piece edges exactly")
        out = []
        for s in parts:
            src = {owner.get(e) for e in s}
            if len(src) != 1 or None in src:
                raise ValueError("refined block is not inside a single piece")
            pc = pieces[src.pop()]
            out.append(BipartiteGraph(Graph(pc.host_n, s), pc.bipartition))
        return out

    return cut(pieces_a, r.parts_a), cut(pieces_b, r.parts_b)


def equalize_pieces(
    pieces_a: Sequence[BipartiteGraph], pieces_b: Sequence[BipartiteGraph]
) -> tuple[list[BipartiteGraph], list[BipartiteGraph]]:
    """
    Re-cut two families of edge-disjoint pieces with equal total edge count
    into matched lists with equal edge counts, pair by pair.

    Edges are carved in color-class order of a proper coloring of their
    piece, so a carved block is close to a union of matchings and its
    maximum degree stays low.
    """
    pieces_a = [p for p in pieces_a if p.edges]
    pieces_b = [p for p in pieces_b if p.edges]
    rank = {}
    for pc in list(pieces_a) + list(pieces_b):
        col = vizing_color(pc.graph)
        for e, c in col.colors.items():
            rank[e] = (c, e)
    r = equal_size_refine(
        [set(p.edges) for p in pieces_a], [set(p.edges) for p in pieces_b], key=rank.__getitem__
    )
    return split_by_refinement(pieces_a, pieces_b, r)
