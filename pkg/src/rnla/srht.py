"""Randomized Hadamard transform and its subsampled fast application.

The operator is S^T H D (left side, hitting columns) or D H S (right side,
hitting rows): a random +-1 diagonal D, the normalized Hadamard matrix
H = (1/sqrt(n)) Htilde, and uniform row sampling S with rescale sqrt(n/r).
Non-power-of-two inputs are zero-padded up to n_pad internally; callers never
see the padded dimension except through the operator itself.

Only r of the n transformed entries are ever needed, so the subsampled
transform recurses on the sampled index set: Htilde_n x = [Htilde_{n/2}(x1+x2);
Htilde_{n/2}(x1-x2)], and each half is entered only if it contains requested
indices.  Each computed half-combination charges n/2 adds to the counter,
which keeps the total at or below 2 n log2(r+1) for r draws.

Reproducibility contract: one Philox stream per operator seed, sign draws
consumed first, index draws second.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix
from .sampling import SamplingPlan, _draw_indices, make_rng, uniform_probs

__all__ = [
    "OpCounter",
    "SrhtOperator",
    "fwht",
    "subsampled_fwht",
    "make_srht",
    "srht_apply",
    "coherence_check",
]


@dataclass
class OpCounter:
    """Accumulates additions/subtractions performed by a transform call."""

    adds_subs: int = 0

    def add(self, k: int) -> None:
        if k < 0:
            raise ValueError("op counts only increase")
        self.adds_subs += int(k)


@dataclass(frozen=True)
class SrhtOperator:
    """Subsampled randomized Hadamard transform S^T H D (or D H S).

    side="left" applies S^T H D to the columns of a matrix with at most n_pad
    rows; side="right" applies D H S to the rows of a matrix with at most
    n_pad columns.  The plan is uniform over n_pad, so every scale equals
    sqrt(n_pad / r).
    """

    n_pad: int
    signs: np.ndarray
    plan: SamplingPlan
    side: str

    def __post_init__(self):
        if not _is_pow2(self.n_pad):
            raise ValueError("n_pad must be a power of two")
        s = np.ascontiguousarray(self.signs, dtype=np.float64)
        object.__setattr__(self, "signs", s)
        if s.shape != (self.n_pad,) or not np.all(np.abs(s) == 1.0):
            raise ValueError("signs must be a +-1 vector of length n_pad")
        if self.plan.n != self.n_pad:
            raise ValueError("plan must be drawn over n_pad")
        if self.side not in ("left", "right"):
            raise ValueError(f"unknown side {self.side!r}")

    @property
    def r(self) -> int:
        return self.plan.c


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def next_pow2(n: int) -> int:
    if n < 1:
        raise ValueError("n must be >= 1")
    return 1 << (n - 1).bit_length() if n > 1 else 1


def _hadamard_full(y: np.ndarray, counter: OpCounter) -> np.ndarray:
    """Unnormalized Hadamard transform down axis 0 of an (n, k) block."""
    n, k = y.shape
    out = y.copy()
    h = 1
    while h < n:
        blk = out.reshape(n // (2 * h), 2, h, k)
        top, bot = blk[:, 0], blk[:, 1]
        out = np.stack((top + bot, top - bot), axis=1).reshape(n, k)
        counter.add(n * k)
        h *= 2
    return out


def fwht(x, counter: OpCounter | None = None) -> np.ndarray:
    """Normalized fast Walsh-Hadamard transform H_n x.

    x must have power-of-two length.  The counter gains exactly n log2(n)
    additions/subtractions; the final 1/sqrt(n) normalization multiplies are
    not counted.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 1 or not _is_pow2(x.size):
        raise ValueError("fwht requires a 1-d vector of power-of-two length")
    if counter is None:
        counter = OpCounter()
    n = x.size
    return _hadamard_full(x.reshape(n, 1), counter)[:, 0] / math.sqrt(n)


def _hadamard_sampled(y: np.ndarray, idx: np.ndarray, counter: OpCounter) -> np.ndarray:
    """Rows idx (sorted, distinct, 0-based) of Htilde_n @ y, y an (n, k) block.

    Split recursion on the sampled index set: a half is combined and entered
    only when it holds requested indices, at n/2 adds per computed half.
    """
    n = y.shape[0]
    if n == 1:
        return y[0:1].copy()
    half = n // 2
    split = int(np.searchsorted(idx, half))
    parts = []
    if split > 0:
        u = y[:half] + y[half:]
        counter.add(half * y.shape[1])
        parts.append(_hadamard_sampled(u, idx[:split], counter))
    if split < idx.size:
        v = y[:half] - y[half:]
        counter.add(half * y.shape[1])
        parts.append(_hadamard_sampled(v, idx[split:] - half, counter))
    return np.concatenate(parts, axis=0)


def _sampled_block(y: np.ndarray, plan: SamplingPlan, counter: OpCounter) -> np.ndarray:
    """Sampled rescaled rows of H @ y for an (n, k) block: (r, k)."""
    n = y.shape[0]
    idx0 = plan.indices - 1
    distinct = np.unique(idx0)
    vals = _hadamard_sampled(y, distinct, counter) / math.sqrt(n)
    return vals[np.searchsorted(distinct, idx0)] * plan.scales[:, None]


def subsampled_fwht(x, plan: SamplingPlan, counter: OpCounter | None = None) -> np.ndarray:
    """The plan's r sampled entries of H_n x, each rescaled by sqrt(n/r).

    Output entry t equals fwht(x)[plan.indices[t] - 1] * plan.scales[t].
    Duplicate draws are computed once and emitted once per draw; the counter
    stays at or below 2 n log2(r+1) either way.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("subsampled_fwht expects a 1-d vector")
    if x.size != plan.n:
        raise ValueError(f"plan over n={plan.n} does not match vector length {x.size}")
    if not _is_pow2(x.size):
        raise ValueError("vector length must be a power of two")
    if counter is None:
        counter = OpCounter()
    return _sampled_block(x.reshape(-1, 1), plan, counter)[:, 0]


def make_srht(n: int, r: int, seed: int, side: str = "left") -> SrhtOperator:
    """Draw a fresh SRHT operator for logical dimension n with r samples.

    n_pad is the smallest power of two >= n.  One Philox stream keyed on
    seed is consumed in a fixed order: n_pad sign draws first, then the r
    uniform index draws.
    """
    if n < 1 or r < 1:
        raise ValueError("n and r must be >= 1")
    n_pad = next_pow2(n)
    rng = make_rng(seed)
    signs = np.where(rng.random(n_pad) < 0.5, 1.0, -1.0)
    p = uniform_probs(n_pad).p
    idx0 = _draw_indices(rng, p, r)
    scales = np.full(r, math.sqrt(n_pad / r))
    plan = SamplingPlan(indices=idx0 + 1, scales=scales, c=r, n=n_pad, seed=int(seed))
    return SrhtOperator(n_pad=n_pad, signs=signs, plan=plan, side=side)


def srht_apply(op: SrhtOperator, M, counter: OpCounter | None = None) -> np.ndarray:
    """Apply the operator: S^T H D [M; 0] (left) or [M, 0] D H S (right).

    Zero-padding up to n_pad happens internally.  A 1-d input is treated as a
    single column (left) or single row (right) and returned 1-d with length r.
    """
    if counter is None:
        counter = OpCounter()
    arr = np.ascontiguousarray(M, dtype=np.float64)
    vector_in = arr.ndim == 1
    if vector_in:
        arr = arr.reshape(-1, 1) if op.side == "left" else arr.reshape(1, -1)
    A = as_matrix(arr)
    if op.side == "right":
        A = A.T
    if A.shape[0] > op.n_pad:
        raise ValueError(
            f"input dimension {A.shape[0]} exceeds operator n_pad={op.n_pad}")
    y = np.zeros((op.n_pad, A.shape[1]))
    y[: A.shape[0]] = op.signs[: A.shape[0], None] * A
    y[A.shape[0]:] = 0.0  # padded rows carry sign * 0
    out = _sampled_block(y, op.plan, counter)
    if op.side == "right":
        out = out.T.copy()
    return out[:, 0] if vector_in and op.side == "left" else (
        out[0, :] if vector_in else out)


def coherence_check(U, op: SrhtOperator) -> tuple[float, float]:
    """Largest row norm^2 of H D U against the uniformization threshold.

    U must have orthonormal columns and exactly n_pad rows.  Returns
    (max_i ||(HDU)_{i*}||^2, 2 d ln(40 n d) / n) with n = n_pad; after the
    randomized rotation the first should fall below the second for most sign
    draws.
    """
    U = as_matrix(U)
    n, d = U.shape
    if n != op.n_pad:
        raise ValueError(f"U has {n} rows, operator expects {op.n_pad}")
    gram_err = np.max(np.abs(U.T @ U - np.eye(d)))
    if gram_err > 1e-8:
        raise ValueError(f"coherence_check: columns not orthonormal (|U^T U - I| = {gram_err:.3e})")
    hdu = _hadamard_full(op.signs[:, None] * U, OpCounter()) / math.sqrt(n)
    max_row = float(np.max(np.sum(hdu * hdu, axis=1)))
    threshold = 2.0 * d * math.log(40.0 * n * d) / n
    return max_row, threshold
