import hashlib

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from regbip.generators import GeneratorSpec, circulant, complete, cycle, generate, petersen, random_regular
from regbip.graph import format_edge_list


def _digest(g):
    return hashlib.sha256(format_edge_list(g).encode()).hexdigest()[:16]


def test_complete_small():
    assert complete(2).edges == ((0, 1),)
    k4 = complete(4)
    assert k4.m == 6 and k4.regular_degree() == 3


def test_circulant_cases():
    assert circulant(6, {1}) == cycle(6)
    assert circulant(5, {1, 2}) == complete(5)
    pm = circulant(8, {4})
    assert pm.regular_degree() == 1 and pm.m == 4
    with pytest.raises(ValueError):
        circulant(6, {4})


def test_petersen_shape():
    g = petersen()
    assert (g.n, g.m, g.regular_degree()) == (10, 15, 3)


def test_random_regular_forced_cases():
    assert random_regular(4, 3, seed=5) == complete(4)
    pm = random_regular(6, 1, seed=2)
    assert pm.regular_degree() == 1 and pm.m == 3


@pytest.mark.parametrize(
    "n, d, seed, digest",
    [(100, 10, 7, "5c856be656875893"), (200, 32, 1, "04c2d3fd897a6d0b"), (400, 64, 3, "397ff88829377ffd")],
)
def test_random_regular_is_reproducible(n, d, seed, digest):
    g = random_regular(n, d, seed)
    assert g.regular_degree() == d
    assert _digest(g) == digest


def test_random_regular_rejects_impossible():
    with pytest.raises(ValueError):
        random_regular(5, 3)
    with pytest.raises(ValueError):
        random_regular(4, 4)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 40), st.integers(0, 10), st.integers(0, 1000))
def test_random_regular_property(n, d, seed):
    if d > n - 1 or (n * d) % 2:
        return
    g = random_regular(n, d, seed)
    assert g.regular_degree() == d or (d == 0 and g.m == 0)
    assert g == random_regular(n, d, seed)


def test_spec_parsing():
    assert generate("complete:n=5") == complete(5)
    assert generate("circulant:n=8,offsets=1+4") == circulant(8, (1, 4))
    assert generate("petersen") == petersen()
    spec = GeneratorSpec.parse("random_regular:n=20,d=4,seed=9")
    assert (spec.kind, spec.n, spec.d, spec.seed) == ("random_regular", 20, 4, 9)


@pytest.mark.parametrize("text", ["blob:n=3", "complete", "random_regular:n=10", "complete:n=4,x=1", "circulant:n=6"])
def test_spec_errors(text):
    with pytest.raises(ValueError):
        GeneratorSpec.parse(text)
