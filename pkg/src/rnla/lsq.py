"""Sketch-and-solve overdetermined least squares with runtime diagnostics.

The randomized solver compresses (A, b) through a left-side SRHT operator and
solves the small r x d problem exactly.  Whether a particular realized sketch
was good is checkable after the fact: with X the realized operator, U_A an
orthonormal basis of range(A) and bperp the part of b outside that range, the
two conditions

    sigma_min^2(X U_A) >= 1/sqrt(2)
    ||(X U_A)^T (X bperp)||^2 <= eps * Z^2 / 2

together force the sketched solution's residual to within sqrt(1+eps) of the
optimum Z and bound the forward error by sqrt(eps) * Z / sigma_min(A).  The
ConditionReport carries exactly these quantities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .linalg import as_matrix, as_vector, pseudoinverse, thin_svd
from .srht import OpCounter, make_srht, srht_apply

__all__ = [
    "LsqSolution",
    "ConditionReport",
    "exact_least_squares",
    "LsqSampleSize",
    "ls_sample_size",
    "rand_least_squares",
    "rand_least_squares_amplified",
    "forward_error_bound",
    "check_conditions",
]

COND22_THRESHOLD = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class ConditionReport:
    """Realized-sketch diagnostics for one randomized solve."""

    sigma_min_sq: float     # sigma_min^2 of the sketched basis X U_A
    cross_term: float       # ||(X U_A)^T (X bperp)||_2^2
    Z: float                # optimal residual ||A x_opt - b||
    cond22_pass: bool       # sigma_min_sq >= 1/sqrt(2)
    cond23_pass: bool       # cross_term <= eps * Z^2 / 2


@dataclass(frozen=True)
class LsqSolution:
    """Sketched solution with its residual on the full system."""

    x_tilde: np.ndarray
    residual_norm: float    # ||A x_tilde - b|| on the original, unpadded system
    r_used: int
    diagnostics: ConditionReport | None
    ops: int = 0            # transform adds/subs spent on the sketch


def exact_least_squares(A, b) -> tuple[np.ndarray, float]:
    """Minimum-norm least-squares solution and its residual norm.

    Returns (x_opt, Z) with x_opt = pinv(A) @ b and Z = ||A x_opt - b||_2.
    """
    A, b = as_matrix(A), as_vector(b)
    if A.shape[0] != b.size:
        raise ValueError(f"A has {A.shape[0]} rows but b has length {b.size}")
    x_opt = pseudoinverse(A) @ b
    Z = float(np.linalg.norm(A @ x_opt - b))
    return x_opt, Z


class LsqSampleSize(NamedTuple):
    """Sketch size ceiling plus the two branch values behind the max."""

    count: int
    embed_branch: float   # 48^2 d ln(40 n d) ln(100^2 d ln(40 n d))
    eps_branch: float     # 40 d ln(40 n d) / eps


def ls_sample_size(n: int, d: int, eps: float) -> LsqSampleSize:
    """Theoretical sketch size for the randomized solver.

    The value routinely exceeds n at desk scale (the constants are not
    optimized); rand_least_squares accepts r_override for practical runs.
    """
    if not 1 <= d <= n:
        raise ValueError("need n >= d >= 1")
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    ln_nd = math.log(40.0 * n * d)
    embed = 48.0 ** 2 * d * ln_nd * math.log(100.0 ** 2 * d * ln_nd)
    eps_b = 40.0 * d * ln_nd / eps
    return LsqSampleSize(count=math.ceil(max(embed, eps_b)),
                         embed_branch=embed, eps_branch=eps_b)


def check_conditions(A, b, sketch_of_UA, sketch_of_bperp, eps: float) -> ConditionReport:
    """Evaluate both sketch-quality conditions for a realized operator X.

    sketch_of_UA must be X applied to an orthonormal basis U_A of range(A)
    and sketch_of_bperp must be X applied to bperp = b - U_A U_A^T b.
    """
    A, b = as_matrix(A), as_vector(b)
    XU = as_matrix(sketch_of_UA)
    Xb = as_vector(sketch_of_bperp)
    d = A.shape[1]
    U_A = thin_svd(A).U
    bperp = b - U_A @ (U_A.T @ b)
    Z = float(np.linalg.norm(bperp))
    s = np.linalg.svd(XU, compute_uv=False)
    sigma_min_sq = float(s[d - 1] ** 2) if s.size >= d else 0.0
    cross = float(np.sum((XU.T @ Xb) ** 2))
    return ConditionReport(
        sigma_min_sq=sigma_min_sq,
        cross_term=cross,
        Z=Z,
        cond22_pass=sigma_min_sq >= COND22_THRESHOLD,
        cond23_pass=cross <= eps * Z * Z / 2.0,
    )


def rand_least_squares(A, b, eps: float, seed: int,
                       r_override: int | None = None,
                       diagnostics: bool = True) -> LsqSolution:
    """Sketch-and-solve least squares through a fresh left-side SRHT operator.

    Parameters
    ----------
    A : array_like, shape (n, d)
        Must have full column rank d (checked via the thin SVD).
    b : array_like, shape (n,)
    eps : float
        Target relative residual accuracy, in (0, 1).
    seed : int
        Operator seed; the solve is deterministic given it.
    r_override : int, optional
        Sketch size to use instead of ls_sample_size (which usually exceeds
        n at desk scale).  Must be at least d.
    diagnostics : bool
        Compute the ConditionReport (costs a thin SVD of A plus two more
        sketched columns); disable for timing runs.
    """
    A, b = as_matrix(A), as_vector(b)
    n, d = A.shape
    if A.shape[0] != b.size:
        raise ValueError(f"A has {n} rows but b has length {b.size}")
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    svd_A = thin_svd(A)
    if svd_A.rank != d:
        raise ValueError(f"A must have full column rank {d}, got rank {svd_A.rank}")
    r = int(r_override) if r_override is not None else ls_sample_size(n, d, eps).count
    if r < d:
        raise ValueError(f"sketch size r={r} cannot preserve rank d={d}")
    op = make_srht(n, r, seed, side="left")
    counter = OpCounter()
    sk = srht_apply(op, np.column_stack([A, b]), counter)
    x_tilde, _ = exact_least_squares(sk[:, :d], sk[:, d])
    residual = float(np.linalg.norm(A @ x_tilde - b))
    report = None
    if diagnostics:
        U_A = svd_A.U
        bperp = b - U_A @ (U_A.T @ b)
        skd = srht_apply(op, np.column_stack([U_A, bperp]), counter)
        report = check_conditions(A, b, skd[:, :d], skd[:, d], eps)
    return LsqSolution(x_tilde=x_tilde, residual_norm=residual, r_used=r,
                       diagnostics=report, ops=counter.adds_subs)


def rand_least_squares_amplified(A, b, eps: float, delta: float, seed: int,
                                 r_override: int | None = None,
                                 diagnostics: bool = True) -> LsqSolution:
    """Drive the failure probability below delta by independent repetition.

    Runs ceil(ln(1/delta) / ln 5) independent solves with derived seeds
    seed, seed+1, ... and keeps the smallest residual (ties go to the lower
    seed, so concurrent evaluation cannot change the result).
    """
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    reps = max(1, math.ceil(math.log(1.0 / delta) / math.log(5.0)))
    best = None
    for t in range(reps):
        sol = rand_least_squares(A, b, eps, seed + t,
                                 r_override=r_override, diagnostics=diagnostics)
        if best is None or sol.residual_norm < best.residual_norm:
            best = sol
    return best


def forward_error_bound(A, b, eps: float, gamma: float) -> float:
    """Forward-error bound sqrt(eps) * kappa(A) * sqrt(gamma^-2 - 1) * ||x_opt||.

    gamma in (0, 1] is the assumed fraction of b lying in range(A), i.e.
    ||U_A U_A^T b|| >= gamma ||b||.  Requires full-column-rank A.
    """
    A, b = as_matrix(A), as_vector(b)
    if not 0.0 < gamma <= 1.0:
        raise ValueError("gamma must lie in (0, 1]")
    f = thin_svd(A)
    if f.rank < A.shape[1]:
        raise ValueError("condition number undefined: A is rank deficient")
    kappa = float(f.sigma[0] / f.sigma[-1])
    x_opt, _ = exact_least_squares(A, b)
    return math.sqrt(eps) * kappa * math.sqrt(max(0.0, 1.0 / gamma ** 2 - 1.0)) \
        * float(np.linalg.norm(x_opt))
