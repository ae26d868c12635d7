"""
Bipartite f-factors, Ore certificates, robust-matchability probing, the
regularization of a pair of almost-regular pieces, and 1-factorization of
regular bipartite pieces.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .flow import FlowNetwork, hopcroft_karp
from .graph import BipartiteGraph, Bipartition, Graph

__all__ = [
    "DegreeSpec",
    "OreCertificate",
    "RegularizationParams",
    "RegularizationResult",
    "RegularizationError",
    "ProbeReport",
    "f_factor",
    "ore_violation",
    "brute_force_ore",
    "probe_robust_matchability",
    "regularize_pair",
    "one_factorize",
]


@dataclass(frozen=True)
class DegreeSpec:
    """Target degree f(v) for every vertex of a bipartite graph."""

    targets: Mapping[int, int]
    left: frozenset[int]
    right: frozenset[int]

    @classmethod
    def on(cls, bp: Bipartition, f: Mapping[int, int]) -> "DegreeSpec":
        if set(f) != set(bp.vertices):
            raise ValueError("degree targets must cover exactly the bipartite vertex set")
        if any(int(x) < 0 for x in f.values()):
            raise ValueError("degree targets must be non-negative")
        return cls({int(k): int(v) for k, v in f.items()}, bp.left, bp.right)

    @property
    def side_sums(self) -> tuple[int, int]:
        return sum(self.targets[v] for v in self.left), sum(self.targets[v] for v in self.right)

    def __getitem__(self, v: int) -> int:
        return self.targets[v]


@dataclass(frozen=True)
class OreCertificate:
    """S in X, T in Y with e(S, T) < f(S) + f(T) - f(X): no f-factor exists."""

    s: frozenset[int]
    t_set: frozenset[int]
    lhs: int
    rhs: int

    def to_json(self) -> dict:
        return {"S": sorted(self.s), "T": sorted(self.t_set), "lhs": self.lhs, "rhs": self.rhs}


def ore_violation(h: BipartiteGraph, f: DegreeSpec, s, t) -> OreCertificate | None:
    """Recount e(S,T) and f(S)+f(T)-f(X); a certificate if the inequality fails."""
    s, t = frozenset(s), frozenset(t)
    lhs = sum(1 for u, v in h.edges if (u in s and v in t) or (v in s and u in t))
    rhs = sum(f[v] for v in s) + sum(f[v] for v in t) - f.side_sums[0]
    return OreCertificate(s, t, lhs, rhs) if lhs < rhs else None


def brute_force_ore(h: BipartiteGraph, f: DegreeSpec) -> OreCertificate | None:
    """First violating (S, T) over all subsets; exponential, small inputs only."""
    X, Y = sorted(f.left), sorted(f.right)
    for r in range(len(X) + 1):
        for s in itertools.combinations(X, r):
            for q in range(len(Y) + 1):
                for t in itertools.combinations(Y, q):
                    cert = ore_violation(h, f, s, t)
                    if cert is not None:
                        return cert
    return None


def f_factor(h: BipartiteGraph, f: DegreeSpec, rng: np.random.Generator | None = None) -> Graph | OreCertificate:
    """
    An f-factor of the bipartite graph h, or an Ore certificate that none exists.

    The factor is an integral maximum flow on source -> X (capacity f(x)),
    unit arcs X -> Y along the edges of h, Y -> sink (capacity f(y)). When
    the flow falls short of f(X), take R as the vertices reachable from the
    source in the residual network; S = X ∩ R and T = Y \\ R then satisfy
    e(S, T) < f(S) + f(T) - f(X). `rng`, if given, shuffles arc order, which
    changes which factor is returned.
    """
    fx, fy = f.side_sums
    if fx != fy:
        raise ValueError(f"f(X)={fx} differs from f(Y)={fy}")
    X, Y = sorted(f.left), sorted(f.right)
    idx = {v: i + 1 for i, v in enumerate(X + Y)}
    src, sink = 0, len(idx) + 1
    net = FlowNetwork(len(idx) + 2)
    for x in X:
        net.add_arc(src, idx[x], f[x])
    edges = [e if e[0] in f.left else (e[1], e[0]) for e in h.edges if e[0] in idx and e[1] in idx]
    for x, y in edges:
        if x not in f.left or y not in f.right:
            raise ValueError(f"edge ({x}, {y}) does not run between the two sides")
    if rng is not None:
        edges = [edges[i] for i in rng.permutation(len(edges))]
    arcs = [net.add_arc(idx[x], idx[y], 1) for x, y in edges]
    for y in Y:
        net.add_arc(idx[y], sink, f[y])
    flow = net.max_flow(src, sink)
    if flow == fx:
        return Graph(h.host_n, [e for e, a in zip(edges, arcs) if net.cap[a] == 0])

    seen = net.reachable(src)
    s = [x for x in X if seen[idx[x]]]
    t = [y for y in Y if not seen[idx[y]]]
    cert = ore_violation(h, f, s, t)
    if cert is None:
        # the cut translation failed; only reachable through a bug
        if len(X) <= 20 and len(Y) <= 20:
            cert = brute_force_ore(h, f)
        if cert is None:
            raise AssertionError("max flow short of f(X) but no Ore violation found")
    return cert


# ---------------------------------------------------------------------------
# robust matchability


@dataclass
class ProbeReport:
    trials: int
    successes: int
    first_failure: dict | None = None

    @property
    def success_rate(self) -> float:
        return self.successes / self.trials if self.trials else 1.0

    def to_json(self) -> dict:
        return {
            "trials": self.trials,
            "successes": self.successes,
            "success_rate": self.success_rate,
            "first_failure": self.first_failure,
        }


def _sample_deletion(h: BipartiteGraph, cap: int, rng) -> Graph:
    # random greedy subgraph with max degree <= cap
    deg = np.zeros(h.host_n, dtype=np.int64)
    keep = []
    for i in rng.permutation(h.graph.m):
        u, v = h.edges[i]
        if deg[u] < cap and deg[v] < cap:
            deg[u] += 1
            deg[v] += 1
            keep.append((u, v))
    return Graph(h.host_n, keep)


def _balance(vals: dict, heavy, light, lo: int, hi: int) -> bool:
    """Lower the largest values on the heavier side (then raise the smallest on the lighter) until sums agree."""
    diff = sum(vals[v] for v in heavy) - sum(vals[v] for v in light)
    while diff > 0:
        v = max(heavy, key=lambda u: (vals[u], -u))
        if vals[v] > lo:
            vals[v] -= 1
        else:
            w = min(light, key=lambda u: (vals[u], u))
            if vals[w] >= hi:
                return False
            vals[w] += 1
        diff -= 1
    return True


def probe_robust_matchability(
    h: BipartiteGraph,
    d: float,
    rho: float,
    alpha: float,
    gamma: float,
    trials: int,
    rng: np.random.Generator | None = None,
) -> ProbeReport:
    """
    Monte Carlo test of robust matchability.

    Each trial deletes a random greedy subgraph F with Delta(F) <= rho*d,
    picks alpha' <= alpha with alpha'*d a positive integer, and draws integer
    f(v) uniformly in [(1-gamma) alpha' d, alpha' d], evened out so that
    f(X) = f(Y). A trial succeeds when h - F has an f-factor. The first
    failure is reported with its (validated) certificate.
    """
    rng = rng if rng is not None else np.random.default_rng()
    X, Y = sorted(h.bipartition.left), sorted(h.bipartition.right)
    if len(X) != len(Y):
        raise ValueError("probe needs a balanced bipartite graph")
    top = math.floor(alpha * d)
    report = ProbeReport(trials, 0)
    for trial in range(trials):
        F = _sample_deletion(h, math.floor(rho * d), rng)
        rest = BipartiteGraph(h.graph.minus(F), h.bipartition)
        if top < 1:
            f = {v: 0 for v in X + Y}
            hi = 0
        else:
            hi = int(rng.integers(1, top + 1))
            lo = math.ceil((1 - gamma) * hi)
            f = {v: int(rng.integers(lo, hi + 1)) for v in X + Y}
            sx, sy = sum(f[v] for v in X), sum(f[v] for v in Y)
            heavy, light = (X, Y) if sx >= sy else (Y, X)
            _balance(f, heavy, light, lo, hi)
        spec = DegreeSpec.on(h.bipartition, f)
        res = f_factor(rest, spec)
        if isinstance(res, Graph):
            report.successes += 1
        elif report.first_failure is None:
            assert ore_violation(rest, spec, res.s, res.t_set) is not None
            report.first_failure = {
                "trial": trial,
                "alpha_d": hi,
                "deleted_max_degree": F.max_degree(),
                "certificate": res.to_json(),
            }
    return report


# ---------------------------------------------------------------------------
# regularization


@dataclass(frozen=True)
class RegularizationParams:
    rho: float
    alpha: float
    gamma: float
    K: int
    d: float

    @property
    def C(self) -> int:
        if self.K == 0:
            return 0
        return math.ceil((1 - self.gamma) * self.rho * self.d / self.K)

    def hypotheses(self) -> list[str]:
        out = []
        if not (self.rho / self.alpha <= self.K <= self.gamma * self.rho * self.d / 2):
            out.append(f"K={self.K} outside [rho/alpha, gamma*rho*d/2]")
        if self.rho + self.alpha > 1 / 100 or self.gamma > 1 / 30:
            out.append("need rho + alpha <= 1/100 and gamma <= 1/30")
        return out


class RegularizationError(RuntimeError):
    def __init__(self, msg: str, certificate: OreCertificate | None = None, side: str | None = None):
        super().__init__(msg)
        self.certificate = certificate
        self.side = side


@dataclass
class RegularizationResult:
    r_prime: Graph
    r_doubleprime: Graph
    merged: BipartiteGraph
    C: int
    degree: int
    warnings: list[str] = field(default_factory=list)


def _spread(g: Graph, verts) -> int:
    verts = list(verts)
    return g.max_degree_on(verts) - g.min_degree_on(verts) if verts else 0


def regularize_pair(
    gxy: BipartiteGraph,
    hx: BipartiteGraph,
    hy: BipartiteGraph,
    used: Graph,
    params: RegularizationParams,
    strict: bool = True,
    goodness_threshold: float | None = None,
    rng: np.random.Generator | None = None,
) -> RegularizationResult:
    """
    Complete hx (inside X, split {X', X''}) and hy (inside Y, split
    {Y', Y''}) to a regular bipartite spanning graph using unused edges of
    gxy: an f'-factor on [X', Y'] and an f''-factor on [X'', Y''] with
    f(v) = C + Delta(hx ∪ hy) - deg(v). The merged piece has sides
    {X' ∪ Y'', X'' ∪ Y'} and degree C + Delta(hx ∪ hy).

    (A2) equal edge counts and matching side sizes are always enforced.
    (A1), (A3) and the parameter ranges raise in strict mode and are
    recorded as warnings otherwise.
    """
    X, Y = gxy.bipartition.left, gxy.bipartition.right
    if hx.bipartition.vertices != X or hy.bipartition.vertices != Y:
        raise RegularizationError("hx must split X and hy must split Y")
    if hx.graph.m != hy.graph.m:
        raise RegularizationError(f"(A2) violated: e(hx)={hx.graph.m} != e(hy)={hy.graph.m}")
    xp, xpp = hx.bipartition.left, hx.bipartition.right
    yp, ypp = hy.bipartition.left, hy.bipartition.right
    if len(xp) != len(yp):
        yp, ypp = ypp, yp
    if len(xp) != len(yp) or len(xpp) != len(ypp):
        raise RegularizationError(f"(G1) side sizes {len(xp)}/{len(xpp)} vs {len(yp)}/{len(ypp)} cannot be matched")

    K, d, C = params.K, params.d, params.C
    warnings = params.hypotheses()
    a1 = params.gamma * params.rho * d / (4 * K)
    for name, pc, side in (("hx", hx, X), ("hy", hy, Y)):
        sp_ = _spread(pc.graph, side)
        if sp_ > a1:
            warnings.append(f"(A1) {name} spread {sp_} exceeds gamma*rho*d/(4K)={a1:.3g}")
    if goodness_threshold is None:
        goodness_threshold = d / 5
    from .bisect import check_goodness

    for name, pc in (("hx", hx), ("hy", hy)):
        bad = check_goodness(gxy, pc.bipartition, goodness_threshold)
        if bad:
            warnings.append(f"(A3) {name} split is not {goodness_threshold:.3g}-good at {len(bad)} vertices")
    if used.max_degree() > params.rho * d:
        warnings.append(f"Delta(used)={used.max_degree()} exceeds rho*d={params.rho * d:.3g}")
    if strict and warnings:
        raise RegularizationError("; ".join(warnings))

    union = hx.graph.union(hy.graph)
    top = union.max_degree()
    deg = union.degrees()
    avail = gxy.graph.minus(used)
    orientations = [(yp, ypp)]
    if not strict and len(xp) == len(ypp) and len(xpp) == len(yp):
        # the other pairing of the halves is equally valid; try it before giving up
        orientations.append((ypp, yp))
    first_error = None
    for yp, ypp in orientations:
        try:
            factors = _pair_factors(avail, ((xp, yp), (xpp, ypp)), C + top, deg, rng)
            break
        except RegularizationError as exc:
            first_error = first_error or exc
    else:
        raise first_error
    r1, r2 = factors
    merged_graph = union.union(r1, r2)
    merged = BipartiteGraph(merged_graph, Bipartition(xp | ypp, xpp | yp))
    if merged_graph.regular_degree() != C + top:
        raise AssertionError("merged piece is not regular")
    rr = r1.union(r2)
    if rr.max_degree() > params.rho * d / K:
        msg = f"Delta(R' ∪ R'')={rr.max_degree()} exceeds rho*d/K={params.rho * d / K:.3g}"
        if strict:
            raise RegularizationError(msg)
        warnings.append(msg)
    return RegularizationResult(r1, r2, merged, C, C + top, warnings)


def _pair_factors(avail: Graph, halves, target: int, deg, rng) -> list[Graph]:
    """f-factors of avail[A, B] for each (A, B) in halves with f(v) = target - deg(v)."""
    factors = []
    for name, (a, b) in zip(("R'", "R''"), halves):
        bp = Bipartition(a, b)
        f = {v: target - int(deg[v]) for v in bp.vertices}
        sub = BipartiteGraph(Graph(avail.n, [e for e in avail.edges if bp.crosses(*e)]), bp)
        res = f_factor(sub, DegreeSpec.on(bp, f), rng)
        if isinstance(res, OreCertificate):
            raise RegularizationError(
                f"no f-factor for {name}: e(S,T)={res.lhs} < {res.rhs} with |S|={len(res.s)}, |T|={len(res.t_set)}",
                res,
                name,
            )
        factors.append(res)
    return factors


def one_factorize(piece: BipartiteGraph) -> list[Graph]:
    """Split an r-regular balanced spanning bipartite piece into r perfect matchings."""
    r = piece.degree
    L, R = piece.bipartition.left, piece.bipartition.right
    if r is None:
        raise ValueError("piece is not regular")
    if len(L) != len(R) or not piece.is_spanning:
        raise ValueError("piece must be spanning with equal sides")
    left = sorted(L)
    remaining = set(piece.edges)
    out = []
    for _ in range(r):
        adj: dict[int, list[int]] = {u: [] for u in left}
        for u, v in sorted(remaining):
            if u in L:
                adj[u].append(v)
            else:
                adj[v].append(u)
        match = hopcroft_karp(left, adj)
        if len(match) != len(left):
            raise AssertionError("regular bipartite graph without a perfect matching")
        m = Graph(piece.host_n, match.items())
        remaining.difference_update(m.edges)
        out.append(m)
    assert not remaining
    return out
