"""
Random bisections with local guarantees, made constructive by Moser-Tardos
resampling.

Every bisection here is driven by the same randomness: the ground set is
paired up as (g[0], g[1]), (g[2], g[3]), ... over its sorted order (a dummy
vertex completes the last pair when the size is odd) and one fair bit per
pair decides which endpoint goes left. A bad event depends only on the bits
of the pairs it touches. The loop scans events in canonical order
(vertices ascending, then edges lexicographically), and redraws every bit
in the scope of the first violated event, stopping when nothing is violated
or the resample cap is reached. Reaching the cap is an error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .graph import BipartiteGraph, Bipartition, Graph

__all__ = [
    "BadEventReport",
    "GoodnessParams",
    "ResampleStats",
    "ResampleCapExceeded",
    "PreconditionError",
    "BisectionPlan",
    "SplitResult",
    "CleanupResult",
    "RESAMPLE_CAP",
    "initial_bisection",
    "good_bisection",
    "cleanup_bisections",
    "cleanup_count",
    "decompose_by_crossings",
    "check_goodness",
]

RESAMPLE_CAP = 10**6
DUMMY = -1


@dataclass(frozen=True)
class BadEventReport:
    kind: str  # degree_concentration | goodness | uncrossed_edge
    subject: object
    observed: float
    bounds: tuple[float, float]

    @property
    def violated(self) -> bool:
        lo, hi = self.bounds
        return not (lo <= self.observed <= hi)

    @property
    def excess(self) -> float:
        lo, hi = self.bounds
        return max(lo - self.observed, self.observed - hi, 0.0)

    def to_json(self) -> dict:
        subj = list(self.subject) if isinstance(self.subject, tuple) else self.subject
        return {"kind": self.kind, "subject": subj, "observed": self.observed, "bounds": list(self.bounds)}


@dataclass(frozen=True)
class GoodnessParams:
    d: float
    threshold: float | None = None

    def __post_init__(self):
        if self.threshold is None:
            object.__setattr__(self, "threshold", self.d / 5)
        if self.threshold <= 0:
            raise ValueError("goodness threshold must be positive")


@dataclass
class ResampleStats:
    events_checked: int = 0
    resamples: int = 0
    violations_final: int = 0

    def to_json(self) -> dict:
        return {
            "events_checked": self.events_checked,
            "resamples": self.resamples,
            "violations_final": self.violations_final,
        }


class ResampleCapExceeded(RuntimeError):
    def __init__(self, report: BadEventReport, stats: ResampleStats, what: str = "bisection"):
        super().__init__(
            f"{what}: resampling gave up after {stats.resamples} resamples; "
            f"worst event {report.kind} at {report.subject}: observed {report.observed} "
            f"outside {report.bounds}"
        )
        self.report = report
        self.stats = stats


class PreconditionError(ValueError):
    pass


@dataclass
class BisectionPlan:
    """Pairing of a ground set and one decision bit per pair (per copy)."""

    ground_set: tuple[int, ...]
    decisions: np.ndarray  # (copies, pairs) bool; True puts the first endpoint left
    dummy: bool

    @classmethod
    def draw(cls, ground, rng: np.random.Generator, copies: int = 1) -> "BisectionPlan":
        g = tuple(sorted(int(v) for v in ground))
        npairs = (len(g) + 1) // 2
        bits = rng.integers(0, 2, size=(copies, npairs)).astype(bool)
        return cls(g, bits, len(g) % 2 == 1)

    @property
    def pairs(self) -> list[tuple[int, int]]:
        g = list(self.ground_set) + ([DUMMY] if self.dummy else [])
        return list(zip(g[0::2], g[1::2]))

    def firsts_seconds(self) -> tuple[np.ndarray, np.ndarray]:
        g = np.array(list(self.ground_set) + ([DUMMY] if self.dummy else []), dtype=np.int64)
        return g[0::2], g[1::2]

    def left_indicator(self, n: int) -> np.ndarray:
        """(n, copies) 0/1 matrix: 1 where the vertex sits on the left side."""
        first, second = self.firsts_seconds()
        out = np.zeros((n, self.decisions.shape[0]))
        for c, bits in enumerate(self.decisions):
            out[first[bits], c] = 1.0
            sec = second[~bits]
            out[sec[sec != DUMMY], c] = 1.0
        return out

    def bipartition(self, copy: int = 0) -> Bipartition:
        first, second = self.firsts_seconds()
        bits = self.decisions[copy]
        left = np.concatenate([first[bits], second[~bits]])
        right = np.concatenate([first[~bits], second[bits]])
        return Bipartition(left[left != DUMMY].tolist(), right[right != DUMMY].tolist())


@dataclass
class SplitResult:
    bipartition: Bipartition
    stats: ResampleStats
    plan: BisectionPlan
    cut: Graph | None = None
    warnings: list[str] = field(default_factory=list)
    polish_moves: int = 0


@dataclass
class CleanupResult:
    bipartitions: list[Bipartition]
    stats: ResampleStats
    plan: BisectionPlan
    warnings: list[str] = field(default_factory=list)


# ---------------------------------------------------------------------------
# shared machinery


def _pair_index(plan: BisectionPlan) -> dict[int, int]:
    return {v: i // 2 for i, v in enumerate(plan.ground_set)}


def _neighborhood_rows(n: int, rows: list[int], nbhds: list[list[int]]) -> sp.csr_matrix:
    indptr = np.zeros(len(rows) + 1, dtype=np.int64)
    indptr[1:] = np.cumsum([len(nb) for nb in nbhds])
    indices = np.fromiter((v for nb in nbhds for v in nb), dtype=np.int64, count=int(indptr[-1]))
    return sp.csr_matrix((np.ones(len(indices)), indices, indptr), shape=(len(rows), n))


def _odd_scope(nbhd, pidx: dict[int, int]) -> np.ndarray:
    """Pairs with exactly one endpoint in nbhd: the bits that move |nbhd ∩ left|."""
    hits: dict[int, int] = {}
    for v in nbhd:
        p = pidx[v]
        hits[p] = hits.get(p, 0) + 1
    return np.array(sorted(p for p, c in hits.items() if c == 1), dtype=np.int64)


class _Events:
    """
    A family of bad events over one plan, evaluated in bulk.

    `evaluate(left)` returns parallel arrays (observed, lo, hi) over all
    events in canonical order; `scopes[i]` is a list of (copy, pair-index
    array) whose bits determine event i.
    """

    def __init__(self):
        self.kinds: list[str] = []
        self.subjects: list[object] = []
        self.scopes: list[list[tuple[object, np.ndarray]]] = []
        self.blocks: list = []  # callables left -> (obs, lo, hi)

    def add_block(self, kinds, subjects, scopes, fn):
        self.kinds += kinds
        self.subjects += subjects
        self.scopes += scopes
        self.blocks.append(fn)

    def evaluate(self, left: np.ndarray):
        parts = [fn(left) for fn in self.blocks]
        if not parts:
            z = np.zeros(0)
            return z, z, z
        return tuple(np.concatenate([p[i] for p in parts]) for i in range(3))

    def report(self, i: int, obs, lo, hi) -> BadEventReport:
        return BadEventReport(self.kinds[i], self.subjects[i], float(obs[i]), (float(lo[i]), float(hi[i])))


def _resample_loop(plan: BisectionPlan, events: _Events, n: int, rng, cap: int, what: str) -> ResampleStats:
    stats = ResampleStats()
    nev = len(events.kinds)
    while True:
        left = plan.left_indicator(n)
        obs, lo, hi = events.evaluate(left)
        bad = (obs < lo - 1e-9) | (obs > hi + 1e-9)
        stats.events_checked += nev
        if not bad.any():
            stats.violations_final = 0
            return stats
        first = int(np.flatnonzero(bad)[0])
        scope = events.scopes[first]
        if stats.resamples >= cap or all(p.size == 0 for _, p in scope):
            stats.violations_final = int(bad.sum())
            excess = np.maximum(lo - obs, obs - hi)
            worst = int(np.argmax(np.where(bad, excess, -np.inf)))
            raise ResampleCapExceeded(events.report(worst, obs, lo, hi), stats, what)
        for copies, pairs in scope:
            if pairs.size:
                shape = plan.decisions[copies, pairs].shape
                plan.decisions[copies, pairs] = rng.integers(0, 2, size=shape).astype(bool)
        stats.resamples += 1


POLISH_POWER = 4


def _polish(plan: BisectionPlan, n: int, rows: sp.csr_matrix, half, width, objective, max_moves: int) -> int:
    """
    Greedy descent on single-pair flips (copy 0), used after resampling.

    Each row counts |N ∩ left| for some neighborhood N; its deviation from
    `half` must stay within `width`, so every event that held keeps holding.
    Among flips that respect all rows, take the one lowering
    sum(objective * deviation^4) the most; stop when none does.
    """
    first, second = plan.firsts_seconds()
    npairs = first.size
    cols = np.arange(npairs)
    moves = 0
    while moves < max_moves:
        bits = plan.decisions[0]
        dev = rows @ plan.left_indicator(n)[:, 0] - half
        # a flip sends the pair's left endpoint right and its right endpoint left
        lft = np.where(bits, first, second)
        rgt = np.where(bits, second, first)
        ml, mr = lft != DUMMY, rgt != DUMMY
        q = sp.csr_matrix(
            (
                np.r_[-np.ones(ml.sum()), np.ones(mr.sum())],
                (np.r_[lft[ml], rgt[mr]], np.r_[cols[ml], cols[mr]]),
            ),
            shape=(n, npairs),
        )
        delta = (rows @ q).toarray()
        base = objective @ dev**POLISH_POWER
        new = dev[:, None] + delta
        ok = (np.abs(new) <= width[:, None] + 1e-9).all(axis=0)
        gain = np.where(ok, base - objective @ new**POLISH_POWER, -np.inf)
        p = int(np.argmax(gain))
        if gain[p] > 1e-9:
            plan.decisions[0, p] = not plan.decisions[0, p]
            moves += 1
            continue
        # stuck: try the best pair of flips
        best, arg = 1e-9, None
        for p in range(npairs - 1):
            new2 = new[:, p : p + 1] + delta[:, p + 1 :]
            ok2 = (np.abs(new2) <= width[:, None] + 1e-9).all(axis=0)
            g2 = np.where(ok2, base - objective @ new2**POLISH_POWER, -np.inf)
            i = int(np.argmax(g2))
            if g2[i] > best:
                best, arg = g2[i], (p, p + 1 + i)
        if arg is None:
            break
        for p in arg:
            plan.decisions[0, p] = not plan.decisions[0, p]
        moves += 2
    return moves


def _goodness_block(events: _Events, plan, h_adj, ys, threshold, n):
    """(G2) events for every y in ys and each copy: min(|N(y)∩left|, |N(y)∩right|) >= threshold."""
    pidx = _pair_index(plan)
    nb = [[v for v in h_adj[y] if v in pidx] for y in ys]
    mat = _neighborhood_rows(n, ys, nb)
    deg = np.array([len(x) for x in nb], dtype=float)
    scopes = [_odd_scope(x, pidx) for x in nb]
    ncopies = plan.decisions.shape[0]
    kinds, subjects, sc = [], [], []
    for i, y in enumerate(ys):
        for c in range(ncopies):
            kinds.append("goodness")
            subjects.append(y if ncopies == 1 else (y, c))
            sc.append([(c, scopes[i])])

    def fn(left):
        cnt = mat @ left  # (|ys|, copies)
        obs = np.minimum(cnt, deg[:, None] - cnt).reshape(-1)
        return obs, np.full(obs.size, float(threshold)), np.full(obs.size, np.inf)

    events.add_block(kinds, subjects, sc, fn)


def _satisfiable_goodness(h: BipartiteGraph, X, Y, threshold, strict, warnings) -> list[int]:
    """
    Drop the y whose goodness event no split can satisfy: that needs
    |N(y) ∩ X| >= 2 * ceil(threshold). The drop is recorded in `warnings`.
    """
    xs = set(X)
    need = 2 * math.ceil(threshold - 1e-12)
    bad = [y for y in Y if sum(1 for v in h.graph.adj[y] if v in xs) < need]
    if not bad:
        return Y
    warnings.append(f"{len(bad)} vertices have fewer than {need} neighbors in the ground set; their goodness events cannot hold")
    if strict:
        return Y
    drop = set(bad)
    return [y for y in Y if y not in drop]


def _side_of_h(h: BipartiteGraph, ground) -> list[int]:
    ground = frozenset(ground)
    if ground == h.bipartition.left:
        return sorted(h.bipartition.right)
    if ground == h.bipartition.right:
        return sorted(h.bipartition.left)
    raise PreconditionError("ground set must be one side of the bipartite host")


# ---------------------------------------------------------------------------
# operations


def initial_bisection(
    g: Graph,
    d: int,
    slack: float | None = None,
    rng: np.random.Generator | None = None,
    cap: int = RESAMPLE_CAP,
    polish: bool = False,
) -> SplitResult:
    """
    Balanced bipartition {X, Y} of a d-regular graph with |N(v) ∩ X| within
    d/2 +- slack for every vertex v.

    That single count pins all three degrees at once: in G[X], G[Y] and
    G[X, Y] every vertex has degree d/2 +- slack. slack defaults to d^(2/3).
    With `polish`, a greedy pair-flip descent then pulls the counts toward
    d/2 without leaving the window.
    """
    if g.n % 2:
        raise PreconditionError("initial bisection needs an even number of vertices")
    if g.regular_degree() != d:
        raise PreconditionError(f"graph is not {d}-regular")
    rng = rng if rng is not None else np.random.default_rng()
    slack = d ** (2 / 3) if slack is None else slack
    plan = BisectionPlan.draw(range(g.n), rng)
    pidx = _pair_index(plan)
    verts = list(range(g.n))
    mat = _neighborhood_rows(g.n, verts, [g.adj[v] for v in verts])
    events = _Events()
    events.add_block(
        ["degree_concentration"] * g.n,
        verts,
        [[(0, _odd_scope(g.adj[v], pidx))] for v in verts],
        lambda left: (
            (mat @ left[:, 0]),
            np.full(g.n, d / 2 - slack),
            np.full(g.n, d / 2 + slack),
        ),
    )
    stats = _resample_loop(plan, events, g.n, rng, cap, "initial_bisection")
    moves = 0
    if polish:
        ones = np.ones(g.n)
        moves = _polish(plan, g.n, mat, ones * d / 2, ones * slack, ones, 20 * plan.decisions.shape[1])
    return SplitResult(plan.bipartition(), stats, plan, polish_moves=moves)


def good_bisection(
    h: BipartiteGraph,
    gx: Graph,
    d: float,
    d_prime: float,
    eps: float,
    goodness: GoodnessParams | None = None,
    rng: np.random.Generator | None = None,
    cap: int = RESAMPLE_CAP,
    strict: bool = True,
    cut_coeff: float = 2.0,
    side: str = "left",
    polish: bool = False,
) -> SplitResult:
    """
    Bisect X (the `side` of h) so that

    (L1) every x in X keeps (1 +- cut_coeff / d_prime^(1/3)) * deg_gx(x) / 2
         of its gx-neighbors across the cut, and
    (L2) the split is goodness.threshold-good with respect to h.

    `gx` is a graph in host labels whose edges lie inside X. The returned
    SplitResult carries the cut gx[X', X''] in `cut`. In strict mode the
    hypotheses on h, gx, d_prime and eps raise PreconditionError; otherwise
    they are recorded in `warnings`, and an (L1) window holding no integer is
    widened to the nearest integers. `polish` runs a greedy pair-flip
    descent toward exact halving after resampling; every (L1) and (L2) event
    keeps holding.
    """
    rng = rng if rng is not None else np.random.default_rng()
    goodness = goodness or GoodnessParams(d)
    X = sorted(h.bipartition.left if side == "left" else h.bipartition.right)
    Y = _side_of_h(h, X)
    xs = set(X)
    if any(u not in xs or v not in xs for u, v in gx.edges):
        raise PreconditionError("gx has an edge leaving X")

    warnings = _good_bisection_hypotheses(h, gx, X, d, d_prime, eps)
    Y = _satisfiable_goodness(h, X, Y, goodness.threshold, strict, warnings)
    if warnings and strict:
        raise PreconditionError("; ".join(warnings))

    tau = cut_coeff / d_prime ** (1 / 3)
    plan = BisectionPlan.draw(X, rng)
    pidx = _pair_index(plan)
    n = h.host_n
    events = _Events()

    # degree-concentration events A_x, goodness events B_y, merged by vertex label
    ax = [x for x in X if gx.adj[x]]
    mat = _neighborhood_rows(n, ax, [gx.adj[x] for x in ax])
    dx = np.array([len(gx.adj[x]) for x in ax], dtype=float)
    lo_x, hi_x = (1 - tau) * dx / 2, (1 + tau) * dx / 2
    if not strict:
        # at small degrees the window may hold no integer at all; widen those
        empty = np.ceil(lo_x) > np.floor(hi_x)
        lo_x = np.where(empty, np.floor(lo_x), lo_x)
        hi_x = np.where(empty, np.ceil(hi_x), hi_x)
    a_events = _Events()
    a_events.add_block(
        ["degree_concentration"] * len(ax),
        ax,
        [[(0, _odd_scope(gx.adj[x], pidx))] for x in ax],
        lambda left: (mat @ left[:, 0], lo_x, hi_x),
    )
    b_events = _Events()
    _goodness_block(b_events, plan, h.graph.adj, Y, goodness.threshold, n)
    _merge_by_vertex(events, a_events, b_events, ax, Y)

    stats = _resample_loop(plan, events, n, rng, cap, "good_bisection")
    moves = 0
    if polish:
        # |cut(x) - deg(x)/2| equals | |N(x) ∩ left| - deg(x)/2 | on either side
        hy = [[v for v in h.graph.adj[y] if v in xs] for y in Y]
        rows = sp.vstack([mat, _neighborhood_rows(n, Y, hy)]).tocsr()
        dy = np.array([len(nb) for nb in hy], dtype=float)
        half = np.r_[dx / 2, dy / 2]
        width = np.r_[dx / 2 - lo_x, dy / 2 - goodness.threshold]
        objective = np.r_[np.ones(len(ax)), np.zeros(len(Y))]
        moves = _polish(plan, n, rows, half, width, objective, 20 * plan.decisions.shape[1])
    bp = plan.bipartition()
    cut = Graph(n, [e for e in gx.edges if bp.crosses(*e)])
    return SplitResult(bp, stats, plan, cut, warnings, moves)


def _merge_by_vertex(events: _Events, a: _Events, b: _Events, a_keys, b_keys):
    order = sorted(
        [(k, 0, i) for i, k in enumerate(a_keys)] + [(k, 1, i) for i, k in enumerate(b_keys)]
    )
    perm_src = [(src, i) for _, src, i in order]
    na = len(a_keys)
    flat = np.array([i if src == 0 else na + i for src, i in perm_src], dtype=np.int64)
    srcs = (a, b)
    kinds = [srcs[s].kinds[i] for s, i in perm_src]
    subjects = [srcs[s].subjects[i] for s, i in perm_src]
    scopes = [srcs[s].scopes[i] for s, i in perm_src]

    def fn(left):
        oa, la, ha = a.evaluate(left)
        ob, lb, hb = b.evaluate(left)
        return np.concatenate([oa, ob])[flat], np.concatenate([la, lb])[flat], np.concatenate([ha, hb])[flat]

    events.add_block(kinds, subjects, scopes, fn)


def _good_bisection_hypotheses(h, gx, X, d, d_prime, eps) -> list[str]:
    out = []
    if not (0 < eps <= 5 / 8):
        out.append(f"eps={eps:.4g} outside (0, 5/8]")
    if not (2**18 <= d_prime <= d):
        out.append(f"d'={d_prime:.4g} outside [2^18, d]")
    hd = h.graph.degrees()[sorted(h.bipartition.vertices)]
    s = d ** (2 / 3)
    if hd.size and (hd.min() < d / 2 - s or hd.max() > d / 2 + s):
        out.append(f"host degrees span [{hd.min()}, {hd.max()}], outside d/2 +- d^(2/3)")
    gd = gx.degrees()[X]
    if gd.size and (gd.min() < (1 - eps) * d_prime or gd.max() > (1 + eps) * d_prime):
        out.append(f"gx degrees span [{gd.min()}, {gd.max()}], outside (1 +- eps) d'")
    return out


def cleanup_count(delta: int) -> int:
    """ceil(log2 Delta) + 8 bipartitions."""
    return math.ceil(math.log2(max(delta, 1))) + 8


def cleanup_bisections(
    h: BipartiteGraph,
    gx: Graph,
    delta: int,
    d: float,
    goodness: GoodnessParams | None = None,
    rng: np.random.Generator | None = None,
    cap: int = RESAMPLE_CAP,
    strict: bool = True,
    k: int | None = None,
    side: str = "left",
) -> CleanupResult:
    """
    k independent bisections of X such that (M1) every edge of gx crosses at
    least one of them and (M2) each one is goodness.threshold-good w.r.t. h.

    Strict mode uses k = ceil(log2 delta) + 8 and requires
    Delta(gx) <= delta <= d; otherwise a caller-supplied k >= 1 is honored.
    """
    rng = rng if rng is not None else np.random.default_rng()
    goodness = goodness or GoodnessParams(d)
    X = sorted(h.bipartition.left if side == "left" else h.bipartition.right)
    Y = _side_of_h(h, X)
    xs = set(X)
    if any(u not in xs or v not in xs for u, v in gx.edges):
        raise PreconditionError("gx has an edge leaving X")
    warnings = []
    if gx.max_degree() > delta:
        warnings.append(f"Delta(gx)={gx.max_degree()} exceeds delta={delta}")
    if not (1 <= delta <= d):
        warnings.append(f"delta={delta} outside [1, d]")
    if strict:
        if warnings:
            raise PreconditionError("; ".join(warnings))
        k = cleanup_count(delta)
    elif k is None:
        k = cleanup_count(delta)
    if k < 1:
        raise ValueError("need at least one bipartition")
    Y = _satisfiable_goodness(h, X, Y, goodness.threshold, strict, warnings)
    if strict and warnings:
        raise PreconditionError("; ".join(warnings))

    plan = BisectionPlan.draw(X, rng, copies=k)
    pidx = _pair_index(plan)
    n = h.host_n
    events = _Events()
    _goodness_block(events, plan, h.graph.adj, Y, goodness.threshold, n)

    edges = [e for e in gx.edges if pidx[e[0]] != pidx[e[1]]]  # paired edges always cross
    if edges:
        ea = np.array([e[0] for e in edges])
        eb = np.array([e[1] for e in edges])
        all_copies = slice(None)
        scopes = [[(all_copies, np.array(sorted({pidx[u], pidx[v]}), dtype=np.int64))] for u, v in edges]

        def fn(left):
            crossed = (left[ea, :] != left[eb, :]).sum(axis=1).astype(float)
            return crossed, np.ones(len(edges)), np.full(len(edges), float(k))

        events.add_block(["uncrossed_edge"] * len(edges), list(edges), scopes, fn)

    stats = _resample_loop(plan, events, n, rng, cap, "cleanup_bisections")
    return CleanupResult([plan.bipartition(c) for c in range(k)], stats, plan, warnings)


def decompose_by_crossings(gx: Graph, bps: list[Bipartition]) -> list[BipartiteGraph]:
    """
    Split gx into one bipartite piece per bipartition, each edge going to the
    first bipartition it crosses. Pieces may be empty.
    """
    buckets: list[list] = [[] for _ in bps]
    for e in gx.edges:
        for i, bp in enumerate(bps):
            if bp.crosses(*e):
                buckets[i].append(e)
                break
        else:
            raise ValueError(f"edge {e} crosses none of the bipartitions")
    return [BipartiteGraph(Graph(gx.n, b), bp) for b, bp in zip(buckets, bps)]


def check_goodness(h: BipartiteGraph, bp: Bipartition, threshold: float) -> list[BadEventReport]:
    """Reports for every violation of (G1) sizes and (G2) neighbor counts; empty iff good."""
    Y = _side_of_h(h, bp.vertices)
    out = []
    diff = abs(len(bp.left) - len(bp.right))
    if diff > 1:
        out.append(BadEventReport("goodness", "sizes", float(diff), (0.0, 1.0)))
    for y in Y:
        nb = h.graph.adj[y]
        a = sum(1 for v in nb if v in bp.left)
        b = sum(1 for v in nb if v in bp.right)
        if min(a, b) < threshold:
            out.append(BadEventReport("goodness", y, float(min(a, b)), (float(threshold), math.inf)))
    return out
