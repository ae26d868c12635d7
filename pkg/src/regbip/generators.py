"""
Test-graph generators: complete graphs, circulants and seeded random regular
graphs, plus the "kind:key=value,..." spec strings used on the command line.

Randomness comes from numpy's PCG64 generator, whose stream is specified
and platform independent, so a seed pins the output graph exactly.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .graph import Graph, norm_edge

__all__ = ["GeneratorSpec", "complete", "circulant", "random_regular", "petersen", "cycle", "generate"]

RESTART_CAP = 10**5


def complete(n: int) -> Graph:
    if n < 2:
        raise ValueError("complete graph needs n >= 2")
    return Graph(n, [(u, v) for u in range(n) for v in range(u + 1, n)])


def cycle(n: int) -> Graph:
    return circulant(n, {1})


def circulant(n: int, offsets) -> Graph:
    """Vertex i adjacent to i +- s (mod n) for every offset s in 1..n//2."""
    offsets = sorted(set(int(s) for s in offsets))
    if not offsets or offsets[0] < 1 or offsets[-1] > n // 2:
        raise ValueError(f"offsets must lie in 1..{n // 2}, got {offsets}")
    edges = {norm_edge(i, (i + s) % n) for i in range(n) for s in offsets}
    return Graph(n, edges)


def petersen() -> Graph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return Graph(10, outer + spokes + inner)


def random_regular(n: int, d: int, seed: int = 0) -> Graph:
    """
    Simple d-regular graph on n vertices from the pairing model.

    Stubs are shuffled and paired; pairs that would form a loop or a repeated
    edge go back to the pool and are re-paired. When the pool can no longer
    produce a valid pair the attempt restarts from scratch (at most
    RESTART_CAP times). Not uniform over d-regular graphs.
    """
    if n < 1 or d < 0 or d > n - 1 or (n * d) % 2:
        raise ValueError(f"no simple {d}-regular graph on {n} vertices")
    rng = np.random.Generator(np.random.PCG64(seed))
    if d == 0:
        return Graph(n)
    for _ in range(RESTART_CAP):
        edges = _try_pairing(n, d, rng)
        if edges is not None:
            return Graph(n, edges)
    raise RuntimeError(f"random_regular({n}, {d}) failed after {RESTART_CAP} restarts")


def _try_pairing(n: int, d: int, rng: np.random.Generator):
    edges: set[tuple[int, int]] = set()
    stubs = np.repeat(np.arange(n), d)
    while stubs.size:
        rng.shuffle(stubs)
        leftover: dict[int, int] = defaultdict(int)
        for a, b in stubs.reshape(-1, 2).tolist():
            e = norm_edge(a, b)
            if a != b and e not in edges:
                edges.add(e)
            else:
                leftover[a] += 1
                leftover[b] += 1
        if not leftover:
            break
        verts = sorted(leftover)
        if not any(
            norm_edge(u, v) not in edges for i, u in enumerate(verts) for v in verts[i + 1 :]
        ):
            return None
        stubs = np.array([v for v in verts for _ in range(leftover[v])], dtype=np.int64)
    return edges


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    n: int
    d: int | None = None
    offsets: tuple[int, ...] = field(default_factory=tuple)
    seed: int = 0

    @classmethod
    def parse(cls, text: str) -> "GeneratorSpec":
        """Parse e.g. "random_regular:n=200,d=32,seed=7" or "circulant:n=8,offsets=1+4"."""
        kind, _, rest = text.partition(":")
        kind = kind.strip()
        if kind not in ("complete", "circulant", "random_regular", "petersen"):
            raise ValueError(f"unknown generator kind {kind!r}")
        kv = {}
        for item in filter(None, (s.strip() for s in rest.split(","))):
            key, eq, val = item.partition("=")
            if not eq:
                raise ValueError(f"expected key=value, got {item!r}")
            kv[key.strip()] = val.strip()
        unknown = set(kv) - {"n", "d", "offsets", "seed"}
        if unknown:
            raise ValueError(f"unknown generator keys {sorted(unknown)}")
        if kind == "petersen":
            return cls("petersen", 10)
        if "n" not in kv:
            raise ValueError("generator spec needs n=")
        offsets = tuple(int(x) for x in kv["offsets"].split("+")) if "offsets" in kv else ()
        spec = cls(
            kind,
            int(kv["n"]),
            int(kv["d"]) if "d" in kv else None,
            offsets,
            int(kv.get("seed", 0)),
        )
        if kind == "random_regular" and spec.d is None:
            raise ValueError("random_regular needs d=")
        if kind == "circulant" and not offsets:
            raise ValueError("circulant needs offsets=")
        return spec

    def build(self) -> Graph:
        if self.kind == "complete":
            return complete(self.n)
        if self.kind == "circulant":
            return circulant(self.n, self.offsets)
        if self.kind == "petersen":
            return petersen()
        return random_regular(self.n, self.d, self.seed)


def generate(spec: str | GeneratorSpec) -> Graph:
    if isinstance(spec, str):
        spec = GeneratorSpec.parse(spec)
    return spec.build()
