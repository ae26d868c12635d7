import json

import numpy as np
import pytest

from regbip.bisect import PreconditionError
from regbip.generators import complete, cycle, generate
from regbip.graph import BipartiteGraph, Bipartition, Decomposition, Graph
from regbip.pipeline import (
    PipelineParams,
    StageError,
    decompose,
    decomposition_from_json,
    one_factorization,
    part_bound,
    verify,
)


@pytest.fixture(scope="module")
def k64_result():
    return decompose(complete(64), PipelineParams(seed=1))


def _c4_matchings():
    bp = Bipartition({0, 2}, {1, 3})
    m1 = BipartiteGraph(Graph(4, [(0, 1), (2, 3)]), bp)
    m2 = BipartiteGraph(Graph(4, [(1, 2), (0, 3)]), bp)
    return m1, m2


def test_part_bound():
    assert part_bound(64) == pytest.approx(42.0)
    assert part_bound(255) == pytest.approx(43.994, abs=1e-3)


def test_verify_hand_built_c4():
    m1, m2 = _c4_matchings()
    rep = verify(cycle(4), Decomposition(cycle(4), (m1, m2)))
    assert rep.ok and rep.piece_degrees == [1, 1]


def test_verify_missing_edge():
    m1, m2 = _c4_matchings()
    short = BipartiteGraph(Graph(4, [(0, 1)]), m1.bipartition)
    rep = verify(cycle(4), Decomposition(cycle(4), (short, m2)))
    assert not rep.edge_partition_ok and not rep.ok


def test_verify_inner_edge_via_json():
    m1, m2 = _c4_matchings()
    data = {"parts": [m1.to_json(), m2.to_json()]}
    # move vertex 1 to the left so edge (0, 1) sits inside one side
    data["parts"][0]["bipartition"] = [[0, 1, 2], [3]]
    rep = verify(cycle(4), decomposition_from_json(data, cycle(4)))
    assert not rep.all_bipartite and not rep.ok


def test_verify_duplicate_edge():
    m1, _ = _c4_matchings()
    rep = verify(cycle(4), Decomposition(cycle(4), (m1, m1)))
    assert not rep.edge_partition_ok


@pytest.mark.parametrize("g, parts", [(complete(2), 1), (cycle(4), None), (complete(4), None)])
def test_small_inputs(g, parts):
    res = decompose(g, PipelineParams(seed=1))
    assert res.report.ok
    if parts is not None:
        assert res.report.part_count == parts


def test_small_one_factorizations():
    assert len(one_factorization(cycle(4), PipelineParams(seed=1))) == 2
    ms = one_factorization(complete(4), PipelineParams(seed=1))
    assert len(ms) == 3
    assert sorted(e for m in ms for e in m.edges) == sorted(complete(4).edges)


def test_k64(k64_result):
    res = k64_result
    assert res.report.ok
    assert res.report.part_count <= part_bound(63)
    assert sum(res.report.piece_degrees) == 63
    dec, report, trace = res
    stages = [s["stage"] for s in trace["stages"]]
    assert stages[0] == "initial_bisection" and "leftover" in stages


def test_k64_one_factorization():
    g = complete(64)
    ms = one_factorization(g, PipelineParams(seed=1))
    assert len(ms) == 63
    assert all(m.m == 32 and m.max_degree() == 1 for m in ms)
    edges = [e for m in ms for e in m.edges]
    assert len(edges) == len(set(edges)) == g.m


def test_k256_within_bound():
    res = decompose(complete(256), PipelineParams(seed=1))
    assert res.report.ok
    assert res.report.part_count <= part_bound(255)


def test_json_round_trip(k64_result):
    data = json.loads(k64_result.dumps())
    assert data["verified"] and data["part_count"] == len(data["parts"])
    assert data["mode"] == "practical" and data["seed"] == 1
    back = decomposition_from_json(data, complete(64))
    assert verify(complete(64), back).ok


def test_tampered_json_fails(k64_result):
    data = json.loads(k64_result.dumps())
    data["parts"][0]["edges"].pop()
    assert not verify(complete(64), decomposition_from_json(data, complete(64))).ok


def test_deterministic(k64_result):
    again = decompose(complete(64), PipelineParams(seed=1))
    assert again.dumps() == k64_result.dumps()


def test_stage_failure_names_stage():
    g = generate("random_regular:n=200,d=32,seed=1")
    with pytest.raises(StageError) as info:
        decompose(g, PipelineParams(seed=1, attempts=1))
    assert info.value.stage in {"initial_bisection", "iteration", "cleanup", "regularize", "leftover"}
    assert info.value.to_json()["stage"] == info.value.stage


def test_strict_refuses_desk_scale():
    with pytest.raises(PreconditionError):
        decompose(complete(64), PipelineParams(mode="strict"))


def test_rejects_bad_inputs():
    with pytest.raises(PreconditionError):
        decompose(Graph(3, [(0, 1)]))
    with pytest.raises(PreconditionError):
        decompose(complete(5))


def test_params_validation():
    with pytest.raises(ValueError):
        PipelineParams(mode="fast")
    with pytest.raises(ValueError):
        PipelineParams.from_dict({"bogus": 1})
    p = PipelineParams.from_dict({"seed": 4, "stop_degree": 6})
    assert p.seed == 4 and PipelineParams.from_dict(p.to_json()) == p
