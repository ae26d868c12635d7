"""
Command line entry point: generate, certify, decompose, factorize, verify,
probe and bench.

Exit codes: 0 success, 1 verification failure, 2 usage or input error,
3 stage failure (the stage name is printed on stderr).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone

import numpy as np

from .bisect import PreconditionError, ResampleCapExceeded, initial_bisection
from .factor import probe_robust_matchability
from .generators import GeneratorSpec, generate
from .graph import GraphFormatError, Graph, format_edge_list, induced_bipartite, parse_edge_list
from .pipeline import (
    PipelineParams,
    StageError,
    decompose,
    decomposition_from_json,
    one_factorization,
    part_bound,
    verify,
)
from .spectral import certify

log = logging.getLogger("regbip")

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_STAGE = 0, 1, 2, 3
BENCH_HEADER = ["n", "d", "mode", "parts", "bound", "resamples", "wall_ms", "verified"]

# probe defaults: the strict constants make rho*d and alpha*d vanish at desk-scale d
PROBE_RHO, PROBE_ALPHA, PROBE_GAMMA = 1 / 16, 1 / 4, 1 / 30

# flag name -> PipelineParams field
PARAM_FLAGS = {
    "mode": "mode",
    "seed": "seed",
    "rho": "rho",
    "alpha": "alpha",
    "gamma": "gamma",
    "iterations": "M",
    "stop_degree": "stop_degree",
    "slack_mult": "slack_mult",
    "goodness_mult": "goodness_mult",
    "cleanup_goodness_mult": "cleanup_goodness_mult",
    "cut_coeff": "cut_coeff",
    "cleanup_k": "cleanup_k",
    "resample_cap": "resample_cap",
    "attempts": "attempts",
}


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# I/O helpers


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _write_text(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w") as fh:
        fh.write(text)


def _read_graph(path: str) -> Graph:
    return parse_edge_list(_read_text(path))


def _read_json(path: str):
    try:
        return json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def _dump(obj, args) -> str:
    if not args.no_timestamp:
        obj = {**obj, "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds")}
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def _params(args) -> PipelineParams:
    data = {}
    if getattr(args, "config", None):
        cfg = _read_json(args.config)
        if not isinstance(cfg, dict):
            raise UsageError("--config must hold a JSON object")
        data.update(cfg)
    for flag, name in PARAM_FLAGS.items():
        val = getattr(args, flag, None)
        if val is not None:
            data[name] = val
    if getattr(args, "no_polish", False):
        data["polish"] = False
    try:
        return PipelineParams.from_dict(data)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def total_resamples(trace: dict) -> int:
    return sum(st.get("stats", {}).get("resamples", 0) for st in trace.get("stages", []) if isinstance(st.get("stats"), dict))


# ---------------------------------------------------------------------------
# verbs


def cmd_generate(args) -> int:
    try:
        spec = GeneratorSpec.parse(args.spec)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.seed is not None:
        spec = GeneratorSpec(spec.kind, spec.n, spec.d, spec.offsets, args.seed)
    try:
        g = spec.build()
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _write_text(args.out, format_edge_list(g))
    return EXIT_OK


def cmd_certify(args) -> int:
    g = _read_graph(args.input)
    try:
        cert = certify(g, args.budget, method=args.method)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _write_text(args.out, _dump(cert.to_json(), args))
    return EXIT_OK


def cmd_decompose(args) -> int:
    g = _read_graph(args.input)
    params = _params(args)
    res = decompose(g, params)
    _write_text(args.out, _dump(res.to_json(), args))
    if args.trace:
        trace = {**res.trace, "resamples": total_resamples(res.trace)}
        if args.no_timestamp:
            trace.pop("wall_ms", None)
        _write_text(args.trace, json.dumps(trace, sort_keys=True, indent=1, default=str) + "\n")
    return EXIT_OK if res.report.ok else EXIT_VERIFY


def cmd_factorize(args) -> int:
    g = _read_graph(args.input)
    params = _params(args)
    matchings = one_factorization(g, params)
    out = {
        "n": g.n,
        "d": g.regular_degree(),
        "mode": params.mode,
        "seed": params.seed,
        "matchings": [[list(e) for e in m.edges] for m in matchings],
    }
    _write_text(args.out, _dump(out, args))
    return EXIT_OK


def cmd_verify(args) -> int:
    g = _read_graph(args.graph)
    data = _read_json(args.dec)
    try:
        dec = decomposition_from_json(data, g)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"{args.dec}: malformed decomposition ({exc})") from None
    report = verify(g, dec)
    _write_text(args.out, _dump(report.to_json(), args))
    return EXIT_OK if report.ok else EXIT_VERIFY


def cmd_probe(args) -> int:
    g = _read_graph(args.input)
    d = g.regular_degree()
    if d is None:
        raise UsageError("probe needs a regular graph")
    rng = np.random.default_rng(args.seed)
    slack = args.slack_mult * d ** (2 / 3)
    try:
        split = initial_bisection(g, d, slack, rng, polish=True)
    except ResampleCapExceeded as exc:
        raise StageError("initial_bisection", None, exc) from exc
    h = induced_bipartite(g, split.bipartition)
    report = probe_robust_matchability(h, d, args.rho, args.alpha, args.gamma, args.trials, rng)
    out = {
        "n": g.n,
        "d": d,
        "seed": args.seed,
        "rho": args.rho,
        "alpha": args.alpha,
        "gamma": args.gamma,
        "min_degree": h.graph.min_degree(),
        **report.to_json(),
    }
    _write_text(args.out, _dump(out, args))
    return EXIT_OK if report.successes == report.trials else EXIT_VERIFY


def _bench_cell(spec: str, mode: str, seed: int, base: PipelineParams) -> dict:
    g = generate(spec)
    d = g.regular_degree()
    row = {"n": g.n, "d": d, "mode": mode, "parts": "", "bound": round(part_bound(d), 3), "resamples": "", "wall_ms": ""}
    params = PipelineParams.from_dict({**base.to_json(), "mode": mode, "seed": seed})
    t0 = time.perf_counter()
    try:
        res = decompose(g, params)
    except (StageError, PreconditionError) as exc:
        log.warning("%s %s seed %d failed: %s", spec, mode, seed, exc)
        row.update(wall_ms=round(1000 * (time.perf_counter() - t0), 1), verified=False)
        return row
    row.update(
        parts=res.report.part_count,
        resamples=total_resamples(res.trace),
        wall_ms=round(1000 * (time.perf_counter() - t0), 1),
        verified=res.report.ok,
    )
    return row


def cmd_bench(args) -> int:
    base = _params(args)
    for spec in args.graphs:
        try:
            GeneratorSpec.parse(spec)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    cells = [(spec, mode, s) for spec in args.graphs for mode in args.modes for s in args.seeds]
    # every cell gets its own seed derived from (seed, cell index)
    derived = [int(np.random.SeedSequence([c[2], i]).generate_state(1)[0]) for i, c in enumerate(cells)]
    with ThreadPoolExecutor(max_workers=max(1, args.workers)) as pool:
        rows = list(pool.map(lambda c: _bench_cell(c[0][0], c[0][1], c[1], base), zip(cells, derived)))
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=BENCH_HEADER, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    _write_text(args.out, buf.getvalue())
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _add_pipeline_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=("strict", "practical"))
    p.add_argument("--seed", type=int)
    p.add_argument("--config", help="JSON object of parameter overrides (flags win)")
    p.add_argument("--rho", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--iterations", type=int, help="fixed iteration count instead of the stop rule")
    p.add_argument("--stop-degree", type=int)
    p.add_argument("--slack-mult", type=float)
    p.add_argument("--goodness-mult", type=float)
    p.add_argument("--cleanup-goodness-mult", type=float)
    p.add_argument("--cut-coeff", type=float)
    p.add_argument("--cleanup-k", type=int)
    p.add_argument("--resample-cap", type=int)
    p.add_argument("--attempts", type=int)
    p.add_argument("--no-polish", action="store_true", help="skip the local improvement after resampling")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--no-timestamp", action="store_true", help="omit the timestamp field from JSON output")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(prog="regbip", description="Decompose regular graphs into regular bipartite spanning pieces.")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("generate", parents=[common], help="write a generated graph as an edge list")
    p.add_argument("spec", help='e.g. "complete:n=64" or "random_regular:n=200,d=32,seed=1"')
    p.add_argument("--seed", type=int, help="override the seed given in the generator string")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("certify", parents=[common], help="spectral certificate lambda <= budget * d")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--budget", type=float, default=1 / 12, help="budget fraction of d (default 1/12)")
    p.add_argument("--method", choices=("auto", "dense", "jacobi", "power"), default="auto")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("decompose", parents=[common], help="decompose into regular bipartite spanning pieces")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", default="-")
    p.add_argument("--trace", help="write the stage trace JSON here")
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("factorize", parents=[common], help="split into d perfect matchings via the decomposition")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", default="-")
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_factorize)

    p = sub.add_parser("verify", parents=[common], help="recount a decomposition; exit 1 unless all checks pass")
    p.add_argument("--graph", required=True)
    p.add_argument("--dec", required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("probe", parents=[common], help="Monte Carlo robust-matchability probe on G[X,Y]")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rho", type=float, default=PROBE_RHO)
    p.add_argument("--alpha", type=float, default=PROBE_ALPHA)
    p.add_argument("--gamma", type=float, default=PROBE_GAMMA)
    p.add_argument("--slack-mult", type=float, default=1.0)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("bench", parents=[common], help="CSV of decomposition runs over a grid")
    p.add_argument("--graphs", nargs="+", required=True, metavar="SPEC")
    p.add_argument("--modes", nargs="+", default=["practical"], choices=("strict", "practical"))
    p.add_argument("--seeds", nargs="+", type=int, default=[0])
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default="-")
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"regbip {args.verb}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GraphFormatError as exc:
        print(f"regbip {args.verb}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StageError as exc:
        print(f"stage failure: {exc.stage}: {exc}", file=sys.stderr)
        return EXIT_STAGE
    except PreconditionError as exc:
        print(f"stage failure: precondition: {exc}", file=sys.stderr)
        return EXIT_STAGE


if __name__ == "__main__":
    sys.exit(main())
