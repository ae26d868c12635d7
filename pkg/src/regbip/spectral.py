"""
Adjacency spectra of regular graphs: the (n, d, lambda) certificate and the
expander mixing inequality.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Iterable

import numpy as np

from .graph import Graph, crossing_pair_count

__all__ = [
    "SpectralCertificate",
    "EigenSolverError",
    "jacobi_eigenvalues",
    "certify",
    "mixing_check",
    "DENSE_THRESHOLD",
]

DENSE_THRESHOLD = 2000
LAMBDA_TOL = 1e-8
TOP_EIGEN_TOL = 1e-6


class EigenSolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class SpectralCertificate:
    n: int
    d: int
    lambda_: float
    budget: float
    satisfied: bool
    method: str

    @property
    def estimated(self) -> bool:
        return self.method == "power"

    def to_json(self) -> dict:
        out = asdict(self)
        out["lambda"] = out.pop("lambda_")
        return {k: out[k] for k in ("n", "d", "lambda", "budget", "satisfied", "method")}


def jacobi_eigenvalues(a: np.ndarray, tol: float = 1e-10, max_sweeps: int = 100) -> np.ndarray:
    """
    Eigenvalues of a dense symmetric matrix by cyclic Jacobi rotations.

    Stops once the off-diagonal Frobenius norm drops below `tol` times the
    Frobenius norm of `a` (at least 1); raises EigenSolverError after
    `max_sweeps` sweeps. Returned ascending.
    """
    a = np.array(a, dtype=float, copy=True)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("square matrix required")
    if not np.allclose(a, a.T):
        raise ValueError("matrix is not symmetric")

    def off(m):
        return float(np.linalg.norm(m - np.diag(np.diag(m))))

    tol = tol * max(1.0, float(np.linalg.norm(a)))

    for _ in range(max_sweeps):
        if off(a) < tol:
            return np.sort(np.diag(a))
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-18 * (abs(a[p, p]) + abs(a[q, q])) or apq == 0.0:
                    # negligible next to the diagonal: a rotation would not change it
                    a[p, q] = a[q, p] = 0.0
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta  # theta^2 would overflow
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                a[p, q] = a[q, p] = 0.0
    if off(a) < tol:
        return np.sort(np.diag(a))
    raise EigenSolverError(f"Jacobi did not converge in {max_sweeps} sweeps (off-norm {off(a):.3e})")


def _power_lambda(g: Graph, d: int, iters: int = 1000, seed: int = 0) -> float:
    # largest |eigenvalue| of A - (d/n)J, i.e. max(|lambda_2|, |lambda_n|)
    n = g.n
    e = np.asarray(g.edges, dtype=np.int64).reshape(-1, 2)
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n)
    x -= x.mean()
    x /= np.linalg.norm(x)
    est = 0.0
    for _ in range(iters):
        y = np.zeros(n)
        np.add.at(y, e[:, 0], x[e[:, 1]])
        np.add.at(y, e[:, 1], x[e[:, 0]])
        y -= (d / n) * x.sum()
        norm = np.linalg.norm(y)
        if norm == 0.0:
            return 0.0
        est = norm
        x = y / norm
    return float(est)


def certify(
    g: Graph,
    budget_fraction: float = 1 / 12,
    method: str = "auto",
    dense_threshold: int = DENSE_THRESHOLD,
) -> SpectralCertificate:
    """
    Compute lambda(G) = max(|lambda_2|, |lambda_n|) of a regular graph and
    compare it with budget_fraction * d.

    method: "dense" (LAPACK symmetric solver), "jacobi" (cyclic Jacobi),
    "power" (power iteration on A - (d/n)J, an estimate) or "auto", which is
    dense up to `dense_threshold` vertices and power above.
    """
    if budget_fraction <= 0:
        raise ValueError("budget_fraction must be positive")
    d = g.regular_degree()
    if d is None:
        raise ValueError("certify needs a regular graph")
    if method == "auto":
        method = "dense" if g.n <= dense_threshold else "power"

    if method == "power":
        lam = _power_lambda(g, d)
    else:
        a = g.adjacency_matrix()
        if method == "dense":
            try:
                ev = np.linalg.eigvalsh(a)
            except np.linalg.LinAlgError as exc:
                raise EigenSolverError(str(exc)) from exc
        elif method == "jacobi":
            ev = jacobi_eigenvalues(a)
        else:
            raise ValueError(f"unknown method {method!r}")
        if abs(ev[-1] - d) > TOP_EIGEN_TOL:
            raise EigenSolverError(f"top eigenvalue {ev[-1]!r} differs from degree {d}")
        lam = 0.0 if g.n == 1 else max(abs(ev[-2]), abs(ev[0]))
    lam = min(max(float(lam), 0.0), float(d))
    budget = d * budget_fraction
    return SpectralCertificate(g.n, d, lam, budget, lam <= budget + LAMBDA_TOL, method)


def mixing_check(
    g: Graph, cert: SpectralCertificate, s: Iterable[int], t: Iterable[int]
) -> tuple[float, float, bool]:
    """|e(S,T) - (d/n)|S||T|| against lambda * sqrt(|S||T|), ordered-pair counting."""
    s, t = set(s), set(t)
    lhs = abs(crossing_pair_count(g, s, t) - cert.d / cert.n * len(s) * len(t))
    rhs = cert.lambda_ * math.sqrt(len(s) * len(t))
    return lhs, rhs, lhs <= rhs + 1e-9
