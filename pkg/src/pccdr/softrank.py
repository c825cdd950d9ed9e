"""Differentiable ranking: hard ranks, PAV isotonic regression, and the
soft-rank operator defined as the Euclidean projection of v/epsilon onto the
permutahedron (the convex hull of all permutations of (1..K)).

Everything uses the ascending convention: the smallest value gets rank 1.
The projection is computed by sorting and running pool-adjacent-violators on
the sorted sequence, which is O(K log K) per vector. The row-batched variants
are the hot path of the Spearman loss and run through numba kernels.
"""
from __future__ import annotations

import numba
import numpy as np

from .errors import InvalidInput

# Adjacent solution values closer than this are treated as one pooled block
# when building the (almost-everywhere) Jacobian.
BLOCK_TOL = 1e-12


@numba.njit(cache=True)
def _pav_nonincreasing_rows(y):
    """Row-wise argmin_{u non-increasing} ||u - y||^2 via PAV, O(K) per row."""
    n_rows, n = y.shape
    sol = np.empty_like(y)
    vals = np.empty(n)
    wts = np.empty(n)
    starts = np.empty(n, np.int64)
    for r in range(n_rows):
        top = 0
        for i in range(n):
            vals[top] = y[r, i]
            wts[top] = 1.0
            starts[top] = i
            top += 1
            while top > 1 and vals[top - 2] < vals[top - 1]:
                merged = wts[top - 2] + wts[top - 1]
                vals[top - 2] = (wts[top - 2] * vals[top - 2] + wts[top - 1] * vals[top - 1]) / merged
                wts[top - 2] = merged
                top -= 1
        for b in range(top):
            end = starts[b + 1] if b + 1 < top else n
            for i in range(starts[b], end):
                sol[r, i] = vals[b]
    return sol


@numba.njit(cache=True)
def _block_center_rows(sol, u, tol):
    """Per row, subtract the mean of u over each constant run of sol."""
    n_rows, n = sol.shape
    out = np.empty_like(u)
    for r in range(n_rows):
        i = 0
        while i < n:
            j = i + 1
            while j < n and sol[r, j - 1] - sol[r, j] <= tol:
                j += 1
            acc = 0.0
            for t in range(i, j):
                acc += u[r, t]
            mean = acc / (j - i)
            for t in range(i, j):
                out[r, t] = u[r, t] - mean
            i = j
    return out


def _check_finite(v: np.ndarray) -> None:
    if not np.all(np.isfinite(v)):
        raise InvalidInput("ranking input contains NaN or Inf")


def hard_ranks(v) -> np.ndarray:
    """Fractional ascending ranks: smallest value gets 1, ties share the mean."""
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.size < 1:
        raise InvalidInput("hard_ranks expects a non-empty 1-D vector")
    _check_finite(v)
    _, inverse, counts = np.unique(v, return_inverse=True, return_counts=True)
    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    avg = starts + (counts + 1) / 2.0
    return avg[inverse]


def isotonic_regression(v) -> np.ndarray:
    """Non-decreasing least-squares fit of v (pool-adjacent-violators)."""
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.size < 1:
        raise InvalidInput("isotonic_regression expects a non-empty 1-D vector")
    _check_finite(v)
    return -_pav_nonincreasing_rows(-v[None, :])[0]


def _sorted_projection(z: np.ndarray, epsilon: float):
    """Shared forward pass: returns (order, dual PAV solution, sorted ranks)."""
    theta = z / epsilon
    order = np.argsort(-theta, axis=1, kind="stable")
    s = np.take_along_axis(theta, order, axis=1)
    w = np.arange(z.shape[1], 0, -1, dtype=np.float64)
    dual = _pav_nonincreasing_rows(s - w)
    return order, dual, s - dual


def soft_rank_rows(z, epsilon: float) -> np.ndarray:
    """Row-wise soft ranks: projection of each row / epsilon onto the permutahedron."""
    z = np.asarray(z, dtype=np.float64)
    if epsilon <= 0:
        raise InvalidInput(f"epsilon must be positive, got {epsilon}")
    _check_finite(z)
    order, _, ranks_sorted = _sorted_projection(z, epsilon)
    out = np.empty_like(z)
    np.put_along_axis(out, order, ranks_sorted, axis=1)
    return out


def soft_rank_rows_vjp(z, epsilon: float, upstream) -> np.ndarray:
    """Row-wise u^T J of soft_rank_rows at z.

    In sorted coordinates the Jacobian is (I - B)/epsilon where B averages
    over the PAV pooled blocks; valid almost everywhere, with exact ties
    resolved by the pooled (averaged) block.
    """
    z = np.asarray(z, dtype=np.float64)
    upstream = np.asarray(upstream, dtype=np.float64)
    if upstream.shape != z.shape:
        raise InvalidInput("upstream shape must match input shape")
    if epsilon <= 0:
        raise InvalidInput(f"epsilon must be positive, got {epsilon}")
    _check_finite(z)
    order, dual, _ = _sorted_projection(z, epsilon)
    u_sorted = np.take_along_axis(upstream, order, axis=1)
    g_sorted = _block_center_rows(dual, u_sorted, BLOCK_TOL)
    out = np.empty_like(z)
    np.put_along_axis(out, order, g_sorted, axis=1)
    return out / epsilon


def soft_rank(v, epsilon: float) -> np.ndarray:
    """Soft ranks of a single vector; epsilon -> 0 recovers hard ranks."""
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.size < 1:
        raise InvalidInput("soft_rank expects a non-empty 1-D vector")
    return soft_rank_rows(v[None, :], epsilon)[0]


def soft_rank_vjp(v, epsilon: float, upstream) -> np.ndarray:
    """Vector-Jacobian product of soft_rank for a single vector."""
    v = np.asarray(v, dtype=np.float64)
    upstream = np.asarray(upstream, dtype=np.float64)
    if v.ndim != 1 or v.size < 1:
        raise InvalidInput("soft_rank_vjp expects a non-empty 1-D vector")
    return soft_rank_rows_vjp(v[None, :], epsilon, upstream[None, :])[0]
