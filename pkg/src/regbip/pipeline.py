"""
End-to-end decomposition of a regular graph into regular bipartite spanning
pieces, plus an independent verifier.

The stages, in order:

1. a balanced bisection {X, Y} whose three induced graphs G[X], G[Y] and
   G[X, Y] are all close to d/2-regular; G[X, Y] is held back as the
   absorber pool;
2. repeated good bisections of what is left of G[X] and G[Y], each cut
   trimmed to a common edge count;
3. a cleanup that splits the small remainders into bipartite pieces by a
   short family of bisections, re-cut into pairs of equal edge count;
4. regularization of every (X-piece, Y-piece) pair with f-factors taken from
   the absorber pool, giving one regular spanning piece per pair;
5. whatever is left of the absorber pool, which is forced to be regular.

`verify` recomputes everything it reports from raw edge lists.
"""

from __future__ import annotations

import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field, replace
from typing import Any

import numpy as np

from .bisect import (
    RESAMPLE_CAP,
    GoodnessParams,
    PreconditionError,
    ResampleCapExceeded,
    cleanup_bisections,
    cleanup_count,
    decompose_by_crossings,
    good_bisection,
    initial_bisection,
)
from .edgetools import equalize_pieces, m_edge_subgraph
from .factor import RegularizationError, RegularizationParams, one_factorize, regularize_pair
from .graph import BipartiteGraph, Bipartition, Decomposition, Graph, induced_bipartite, restrict
from .spectral import certify

__all__ = [
    "PipelineParams",
    "VerificationReport",
    "StageError",
    "DecomposeResult",
    "decompose",
    "one_factorization",
    "verify",
    "decomposition_to_json",
    "decomposition_from_json",
    "part_bound",
]

log = logging.getLogger(__name__)

STRICT_MIN_DEGREE = 2**18


@dataclass(frozen=True)
class PipelineParams:
    """
    Knobs for `decompose`.

    Strict mode uses the asymptotic constants unchanged and refuses inputs
    they do not cover. Practical mode iterates until both remainders have
    maximum degree <= stop_degree and scales each tolerance by a multiplier:
    initial slack = slack_mult * d^(2/3), goodness threshold =
    goodness_mult * d/5 (cleanup_goodness_mult for the cleanup, defaulting
    to the same), cut tolerance = cut_coeff / d_j^(1/3).
    """

    mode: str = "practical"
    seed: int = 0
    rho: float = 1 / 200
    alpha: float = 1 / 200
    gamma: float = 1 / 30
    M: int | None = None
    stop_degree: int = 8
    slack_mult: float = 1.0
    goodness_mult: float = 0.625
    cleanup_goodness_mult: float | None = 0.3
    cut_coeff: float = 2.0
    cleanup_k: int | None = None
    resample_cap: int = RESAMPLE_CAP
    attempts: int = 8
    polish: bool = True

    def __post_init__(self):
        if self.mode not in ("strict", "practical"):
            raise ValueError(f"mode must be strict or practical, got {self.mode!r}")
        if self.stop_degree < 0 or self.attempts < 1 or self.resample_cap < 0:
            raise ValueError("stop_degree, attempts and resample_cap must be non-negative (attempts >= 1)")

    @property
    def strict(self) -> bool:
        return self.mode == "strict"

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineParams":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown parameter keys {sorted(unknown)}")
        return cls(**data)

    def to_json(self) -> dict:
        return asdict(self)


@dataclass
class VerificationReport:
    edge_partition_ok: bool
    all_spanning: bool
    all_bipartite: bool
    all_regular: bool
    piece_degrees: list
    part_count: int
    bound: float
    within_bound: bool
    problems: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return (
            self.edge_partition_ok
            and self.all_spanning
            and self.all_bipartite
            and self.all_regular
            and self.within_bound
        )

    def to_json(self) -> dict:
        out = asdict(self)
        out["ok"] = self.ok
        return out


class StageError(RuntimeError):
    """A pipeline stage failed; carries the stage name, iteration and cause."""

    def __init__(self, stage: str, iteration: int | None, cause: BaseException | str, detail: dict | None = None):
        self.stage = stage
        self.iteration = iteration
        self.cause = cause
        self.detail = detail or {}
        where = stage if iteration is None else f"{stage} (iteration {iteration})"
        super().__init__(f"{where}: {cause}")

    def to_json(self) -> dict:
        return {"stage": self.stage, "iteration": self.iteration, "error": str(self.cause), **self.detail}


@dataclass
class DecomposeResult:
    decomposition: Decomposition
    report: VerificationReport
    trace: dict
    params: PipelineParams
    leftover_degree: int

    def to_json(self) -> dict:
        return decomposition_to_json(self.decomposition, self.report, self.params, self.leftover_degree)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))

    def __iter__(self):
        # allows `dec, report, trace = decompose(...)`
        return iter((self.decomposition, self.report, self.trace))


def part_bound(d: int) -> float:
    return math.log2(d) + 36 if d > 0 else 36.0


# ---------------------------------------------------------------------------
# verification


def _two_colorable(edges, n) -> bool:
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    color = [-1] * n
    for s in range(n):
        if color[s] >= 0 or not adj[s]:
            continue
        color[s] = 0
        stack = [s]
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if color[w] < 0:
                    color[w] = 1 - color[u]
                    stack.append(w)
                elif color[w] == color[u]:
                    return False
    return True


def verify(g: Graph, dec: Decomposition) -> VerificationReport:
    """Recount the decomposition of g from raw edges: partition, spanning, bipartite, regular, part count."""
    problems = []
    n = g.n
    host = set(g.edges)
    seen: dict = {}
    partition_ok = True
    spanning = bipartite = regular = True
    degrees = []
    for i, pc in enumerate(dec.pieces):
        left, right = set(pc.bipartition.left), set(pc.bipartition.right)
        if left & right:
            bipartite = False
            problems.append(f"piece {i}: sides overlap")
        if left | right != set(range(n)) or pc.graph.n != n:
            spanning = False
            problems.append(f"piece {i}: not spanning")
        deg = [0] * n
        for u, v in pc.graph.edges:
            e = (min(u, v), max(u, v))
            if e in seen:
                partition_ok = False
                problems.append(f"edge {e} in pieces {seen[e]} and {i}")
            seen[e] = i
            if e not in host:
                partition_ok = False
                problems.append(f"piece {i}: edge {e} not in the host graph")
            if not ((u in left and v in right) or (u in right and v in left)):
                bipartite = False
                problems.append(f"piece {i}: edge {e} inside one side")
            if 0 <= u < n and 0 <= v < n:
                deg[u] += 1
                deg[v] += 1
        if not _two_colorable(pc.graph.edges, n):
            bipartite = False
            problems.append(f"piece {i}: odd cycle")
        common = deg[0] if deg and len(set(deg)) == 1 else None
        if common is None:
            regular = False
            problems.append(f"piece {i}: degrees range over [{min(deg)}, {max(deg)}]")
        degrees.append(common)
    missing = host - set(seen)
    if missing:
        partition_ok = False
        problems.append(f"{len(missing)} host edges are in no piece")
    d = g.max_degree()
    bound = part_bound(d)
    count = len(dec.pieces)
    return VerificationReport(
        partition_ok, spanning, bipartite, regular, degrees, count, bound, count <= bound, problems[:50]
    )


# ---------------------------------------------------------------------------
# serialization


def decomposition_to_json(dec: Decomposition, report: VerificationReport, params: PipelineParams, leftover_degree: int) -> dict:
    return {
        "n": dec.host.n,
        "d": dec.host.max_degree(),
        "mode": params.mode,
        "seed": params.seed,
        "parts": [pc.to_json() for pc in dec.pieces],
        "leftover_degree": leftover_degree,
        "part_count": len(dec.pieces),
        "bound": report.bound,
        "verified": report.ok,
    }


def decomposition_from_json(data: dict, host: Graph) -> Decomposition:
    """Rebuild pieces without validating them; `verify` is the judge."""
    pieces = []
    for part in data["parts"]:
        left, right = part["bipartition"]
        g = _LooseGraph(host.n, [tuple(e) for e in part["edges"]])
        pieces.append(_LoosePiece(g, _LooseBipartition(left, right)))
    return Decomposition(host, tuple(pieces))


class _LooseGraph:
    """Edge list holder that accepts malformed input so tampering reaches the verifier."""

    def __init__(self, n, edges):
        self.n = n
        self.edges = tuple(tuple(int(x) for x in e) for e in edges)


class _LooseBipartition:
    def __init__(self, left, right):
        self.left = frozenset(int(v) for v in left)
        self.right = frozenset(int(v) for v in right)


@dataclass(frozen=True)
class _LoosePiece:
    graph: Any
    bipartition: Any


# ---------------------------------------------------------------------------
# the pipeline


def _strict_schedule(g: Graph, d: int) -> int:
    cert = certify(g, 1 / 12)
    if not cert.satisfied:
        raise PreconditionError(f"lambda={cert.lambda_:.4g} exceeds d/12={d / 12:.4g}")
    M = math.floor(math.log2(d)) - 18 if d > 0 else 0
    if M < 1:
        raise PreconditionError(f"d={d} gives M={M}; strict mode needs M >= 1")
    # iteration j bisects G_{U,j-1}, whose degree scale is d_{j-1} = d / 2^j
    if d / 2**M < STRICT_MIN_DEGREE:
        raise PreconditionError(f"d/2^M={d / 2**M:.4g} is below 2^18")
    return M


def _spread(g: Graph, verts) -> int:
    return g.max_degree_on(verts) - g.min_degree_on(verts) if verts else 0


def decompose(g: Graph, params: PipelineParams | None = None) -> DecomposeResult:
    """
    Decompose a regular graph on an even number of vertices into regular
    bipartite spanning pieces and verify the result.

    In practical mode a failed stage is retried from scratch with a derived
    RNG stream, up to `params.attempts` times; the stream for attempt a is
    seeded with (seed, a), so results stay reproducible.
    """
    params = params or PipelineParams()
    d = g.regular_degree()
    if d is None:
        raise PreconditionError("input graph is not regular")
    if g.n % 2:
        raise PreconditionError("input graph needs an even number of vertices")
    M = _strict_schedule(g, d) if params.strict else params.M

    failures = []
    attempts = 1 if params.strict else params.attempts
    for attempt in range(attempts):
        rng = np.random.default_rng([params.seed, attempt])
        trace: dict = {"params": params.to_json(), "n": g.n, "d": d, "attempt": attempt, "stages": []}
        t0 = time.perf_counter()
        try:
            dec, leftover = _run(g, d, M, params, rng, trace)
        except StageError as exc:
            log.info("attempt %d failed: %s", attempt, exc)
            failures.append(exc.to_json())
            if attempt + 1 == attempts:
                exc.detail["failed_attempts"] = failures
                raise
            continue
        trace["failed_attempts"] = failures
        trace["wall_ms"] = round(1000 * (time.perf_counter() - t0), 3)
        report = verify(g, dec)
        trace["verification"] = report.to_json()
        if not report.ok:
            raise StageError("verify", None, "verification failed: " + "; ".join(report.problems[:5]))
        return DecomposeResult(dec, report, trace, params, leftover)
    raise AssertionError("unreachable")


def _run(g: Graph, d: int, M: int | None, params: PipelineParams, rng, trace) -> tuple[Decomposition, int]:
    strict = params.strict
    stages = trace["stages"]
    n = g.n
    cap = params.resample_cap
    if g.m == 0:
        return Decomposition(g, ()), 0

    # (1) initial bisection and the absorber pool
    slack = d ** (2 / 3) * (1.0 if strict else params.slack_mult)
    try:
        res = initial_bisection(g, d, slack, rng, cap, polish=params.polish and not strict)
    except ResampleCapExceeded as exc:
        raise StageError("initial_bisection", None, exc, {"report": exc.report.to_json()}) from exc
    bp = res.bipartition
    X, Y = sorted(bp.left), sorted(bp.right)
    gxy = induced_bipartite(g, bp)
    gu = {"X": restrict(g, X), "Y": restrict(g, Y)}
    # 2 e(G[U]) + e(G[X, Y]) = d |U| with |X| = |Y|
    if gu["X"].m != gu["Y"].m:
        raise StageError("initial_bisection", None, f"e(G[X])={gu['X'].m} != e(G[Y])={gu['Y'].m}")
    stages.append(
        {"stage": "initial_bisection", "slack": slack, "stats": res.stats.to_json(), "polish_moves": res.polish_moves, "e_xy": gxy.graph.m}
    )

    threshold = d / 5 * (1.0 if strict else params.goodness_mult)
    goodness = GoodnessParams(d, threshold)
    cmult = params.goodness_mult if params.cleanup_goodness_mult is None else params.cleanup_goodness_mult
    cleanup_goodness = GoodnessParams(d, d / 5 * (1.0 if strict else cmult))
    sides = {"X": "left", "Y": "right"}
    verts = {"X": X, "Y": Y}
    pairs: list[tuple[BipartiteGraph, BipartiteGraph]] = []

    # (2) iterative good bisections
    j = 0
    while True:
        if strict:
            if j >= M:
                break
        elif M is not None and j >= M:
            break
        elif max(gu["X"].max_degree(), gu["Y"].max_degree()) <= params.stop_degree:
            break
        j += 1
        dj = d / 2**j  # degree scale of the graph being bisected
        eps = 40 * dj ** (-1 / 3)
        cuts = {}
        for U in ("X", "Y"):
            try:
                r = good_bisection(
                    gxy, gu[U], d, dj, eps, goodness, rng, cap,
                    strict=strict, cut_coeff=2.0 if strict else params.cut_coeff, side=sides[U],
                    polish=params.polish and not strict,
                )
            except (ResampleCapExceeded, PreconditionError) as exc:
                detail = {"report": exc.report.to_json()} if isinstance(exc, ResampleCapExceeded) else {}
                raise StageError("good_bisection", j, exc, {"side": U, **detail}) from exc
            cuts[U] = r
        m = min(cuts["X"].cut.m, cuts["Y"].cut.m)
        if m == 0:
            stages.append({"stage": "good_bisection", "iteration": j, "stopped": "empty cut"})
            break
        entry = {"stage": "good_bisection", "iteration": j, "d_j": dj, "m": m, "sides": {}}
        for U in ("X", "Y"):
            hp, removed = m_edge_subgraph(cuts[U].cut, m)
            gu[U] = gu[U].minus(hp)
            spread = _spread(hp, verts[U])
            entry["sides"][U] = {
                "stats": cuts[U].stats.to_json(),
                "polish_moves": cuts[U].polish_moves,
                "cut_edges": cuts[U].cut.m,
                "trimmed": removed.m,
                "spread": spread,
                "remaining_max_degree": gu[U].max_degree(),
                "warnings": cuts[U].warnings,
            }
            if strict and spread > 70 * dj ** (2 / 3):
                raise StageError("good_bisection", j, f"(I1) spread {spread} exceeds 70 d_j^(2/3)")
            cuts[U] = BipartiteGraph(hp, cuts[U].bipartition)
        # (I4) for the remainders at the next scale
        nxt = d / 2 ** (j + 1)
        epsn = 40 * nxt ** (-1 / 3)
        for U in ("X", "Y"):
            deg = gu[U].degrees()[verts[U]]
            if deg.min() < (1 - epsn) * nxt or deg.max() > (1 + epsn) * nxt:
                msg = f"(I4) {U} remainder degrees in [{deg.min()}, {deg.max()}]"
                if strict:
                    raise StageError("good_bisection", j, msg)
                entry.setdefault("warnings", []).append(msg)
        stages.append(entry)
        pairs.append((cuts["X"], cuts["Y"]))
    iterations = len(pairs)

    # (3) cleanup of the remainders
    delta = max(gu["X"].max_degree(), gu["Y"].max_degree())
    if gu["X"].m:
        if strict:
            k = cleanup_count(delta)
        else:
            k = params.cleanup_k or max(1, math.ceil(math.log2(max(delta, 1))) + 2)
        fams = {}
        entry = {"stage": "cleanup", "delta": delta, "k": k, "sides": {}}
        for U in ("X", "Y"):
            try:
                cr = cleanup_bisections(gxy, gu[U], delta, d, cleanup_goodness, rng, cap, strict=strict, k=k, side=sides[U])
            except (ResampleCapExceeded, PreconditionError) as exc:
                detail = {"report": exc.report.to_json()} if isinstance(exc, ResampleCapExceeded) else {}
                raise StageError("cleanup", None, exc, {"side": U, **detail}) from exc
            fams[U] = decompose_by_crossings(gu[U], cr.bipartitions)
            entry["sides"][U] = {"stats": cr.stats.to_json(), "piece_edges": [p.graph.m for p in fams[U]]}
        pa, pb = equalize_pieces(fams["X"], fams["Y"])
        entry["pairs"] = len(pa)
        stages.append(entry)
        pairs.extend(zip(pa, pb))

    # (4) regularization against the absorber pool
    K = len(pairs)
    rparams = RegularizationParams(params.rho, params.alpha, params.gamma, K, d)
    # merged piece j has degree C + Delta(hx_j ∪ hy_j) and the pieces share d
    need = [rparams.C + max(hx.graph.max_degree(), hy.graph.max_degree()) for hx, hy in pairs]
    ranges = [
        [[int(pc.graph.degrees()[verts[U]].min()), int(pc.graph.max_degree())] for pc, U in ((hx, "X"), (hy, "Y"))]
        for hx, hy in pairs
    ]
    stages.append(
        {"stage": "budget", "pairs": K, "C": rparams.C, "piece_degrees": need, "degree_ranges": ranges, "total": sum(need), "d": d}
    )
    if sum(need) > d:
        raise StageError("regularize", None, f"merged degrees sum to {sum(need)} > d={d}")
    results = _regularize_in_turn(gxy, pairs, rparams, strict, min(threshold, cleanup_goodness.threshold))
    used = Graph(n)
    pieces = []
    for i, rr in enumerate(results):
        used = used.union(rr.r_prime, rr.r_doubleprime)
        pieces.append(rr.merged)
        stages.append(
            {
                "stage": "regularize",
                "pair": i + 1,
                "source": "iteration" if i < iterations else "cleanup",
                "edges": pairs[i][0].graph.m,
                "C": rr.C,
                "degree": rr.degree,
                "absorbed": rr.r_prime.m + rr.r_doubleprime.m,
                "warnings": len(rr.warnings),
            }
        )

    # (5) leftover of the absorber pool
    rest = gxy.graph.minus(used)
    r = rest.regular_degree()
    if r is None:
        lo, hi, _ = rest.min_degree(), rest.max_degree(), None
        raise StageError("leftover", None, f"leftover absorber is not regular (degrees {lo}..{hi})")
    if r > 0:
        pieces.append(BipartiteGraph(rest, bp))
    stages.append({"stage": "leftover", "degree": r, "pairs": K, "iterations": iterations})
    return Decomposition(g, tuple(pieces)), r



def _regularize_in_turn(gxy, pairs, rparams, strict, threshold):
    """Complete the pairs one after another, each from what the earlier ones left."""
    used = Graph(gxy.host_n)
    out = []
    for i, (hx, hy) in enumerate(pairs):
        try:
            rr = regularize_pair(gxy, hx, hy, used, rparams, strict=strict, goodness_threshold=threshold)
        except RegularizationError as exc:
            detail = {"certificate": exc.certificate.to_json()} if exc.certificate else {}
            raise StageError("regularize", i + 1, exc, detail) from exc
        used = used.union(rr.r_prime, rr.r_doubleprime)
        out.append(rr)
    return out

def one_factorization(g: Graph, params: PipelineParams | None = None) -> list[Graph]:
    """d pairwise disjoint perfect matchings covering E(g), one piece at a time."""
    res = decompose(g, params)
    out = []
    for pc in res.decomposition.pieces:
        out.extend(one_factorize(pc))
    return out
