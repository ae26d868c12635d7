import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from regbip.edgetools import equal_size_refine, equalize_pieces, m_edge_subgraph, vizing_color
from regbip.generators import complete, cycle, petersen
from regbip.graph import BipartiteGraph, Bipartition, Graph


@st.composite
def graphs(draw, max_n=14):
    n = draw(st.integers(2, max_n))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    return Graph(n, draw(st.lists(st.sampled_from(pairs), unique=True)))


def _colors_used(col):
    return len(set(col.colors.values()))


def test_matching_needs_one_color():
    col = vizing_color(Graph(6, [(0, 1), (2, 3), (4, 5)]))
    assert col.is_proper() and _colors_used(col) == 1


def test_odd_cycle_needs_three():
    col = vizing_color(cycle(5))
    assert col.is_proper() and _colors_used(col) == 3


def _k_edge_colorable(g, k):
    edges = list(g.edges)
    col = {}

    def go(i):
        if i == len(edges):
            return True
        u, v = edges[i]
        taken = {c for e, c in col.items() if u in e or v in e}
        for c in range(k):
            if c not in taken:
                col[edges[i]] = c
                if go(i + 1):
                    return True
                del col[edges[i]]
        return False

    return go(0)


def test_petersen_is_class_two():
    g = petersen()
    col = vizing_color(g)
    assert col.is_proper() and _colors_used(col) == 4
    assert not _k_edge_colorable(g, 3)
    assert _k_edge_colorable(g, 4)


@settings(max_examples=80, deadline=None)
@given(graphs())
def test_vizing_property(g):
    col = vizing_color(g)
    assert set(col.colors) == set(g.edges)
    assert col.is_proper()
    assert _colors_used(col) <= g.max_degree() + 1


def test_m_edge_subgraph_identity():
    g = complete(5)
    hp, rem = m_edge_subgraph(g, g.m)
    assert hp == g and rem.m == 0


def test_m_edge_subgraph_matching():
    h = Graph(8, [(0, 1), (2, 3), (4, 5), (6, 7)])
    hp, rem = m_edge_subgraph(h, 2)
    assert hp.m == 2 and rem.max_degree() <= 2


def test_m_edge_subgraph_k4():
    h = complete(4)
    hp, rem = m_edge_subgraph(h, 3)
    assert hp.m == 3
    assert hp.max_degree() - hp.min_degree() <= 2
    assert rem.max_degree() <= 3


def test_m_edge_subgraph_range():
    with pytest.raises(ValueError):
        m_edge_subgraph(complete(3), 0)


@settings(max_examples=80, deadline=None)
@given(graphs(), st.data())
def test_m_edge_subgraph_bounds(h, data):
    if h.m == 0:
        return
    m = data.draw(st.integers(1, h.m))
    hp, rem = m_edge_subgraph(h, m)
    e = h.m
    assert hp.m == m and rem.m == e - m
    assert set(hp.edges) | set(rem.edges) == set(h.edges)
    assert hp.max_degree() - hp.min_degree() <= h.max_degree() - h.min_degree() + 2
    assert rem.max_degree() <= (h.max_degree() + 1) * (e - m) / e + 1


def _check_refinement(p, q, r):
    assert r.t <= len(p) + len(q) - 1
    assert [len(a) for a in r.parts_a] == [len(b) for b in r.parts_b]
    assert set().union(*r.parts_a) == set().union(*p)
    assert set().union(*r.parts_b) == set().union(*q)
    assert sum(map(len, r.parts_a)) == sum(map(len, p))
    assert all(any(blk <= b for b in p) for blk in r.parts_a)
    assert all(any(blk <= b for b in q) for blk in r.parts_b)


def test_refine_single_blocks():
    r = equal_size_refine([{1, 2}], [{"a", "b"}])
    assert r.t == 1 and r.parts_a == [frozenset({1, 2})]


def test_refine_small_example():
    p = [{1, 2}, {3, 4}]
    q = [{"a", "b", "c"}, {"d"}]
    _check_refinement(p, q, equal_size_refine(p, q))


def test_refine_rejects_bad_input():
    with pytest.raises(ValueError):
        equal_size_refine([{1}], [{"a", "b"}])
    with pytest.raises(ValueError):
        equal_size_refine([{1, 2}, {2}], [{"a", "b", "c"}])


@settings(max_examples=80, deadline=None)
@given(st.data())
def test_refine_property(data):
    size = data.draw(st.integers(1, 20))
    def part(tag):
        k = data.draw(st.integers(1, min(size, 5)))
        labels = [data.draw(st.integers(0, k - 1)) for _ in range(size)]
        labels[:k] = range(k)
        return [{(tag, i) for i in range(size) if labels[i] == j} for j in range(k)]
    p, q = part("a"), part("b")
    _check_refinement(p, q, equal_size_refine(p, q))


def test_equalize_forced_sizes():
    n = 10
    bp = Bipartition(range(5), range(5, 10))
    a1 = BipartiteGraph(Graph(n, [(0, 5), (1, 6)]), bp)
    a2 = BipartiteGraph(Graph(n, [(2, 7), (3, 8), (4, 9)]), bp)
    b = BipartiteGraph(Graph(n, [(0, 6), (1, 7), (2, 8), (3, 9), (4, 5)]), bp)
    pa, pb = equalize_pieces([a1, a2], [b])
    assert sorted(p.graph.m for p in pa) == [2, 3]
    assert [p.graph.m for p in pa] == [p.graph.m for p in pb]
    assert set().union(*(set(p.edges) for p in pb)) == set(b.edges)


def test_equalize_identity():
    bp = Bipartition({0, 1}, {2, 3})
    a = BipartiteGraph(Graph(4, [(0, 2), (1, 3)]), bp)
    b = BipartiteGraph(Graph(4, [(0, 3), (1, 2)]), bp)
    pa, pb = equalize_pieces([a], [b])
    assert pa[0].edges == a.edges and pb[0].edges == b.edges
