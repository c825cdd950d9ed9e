"""Loss functions and their analytic gradients.

The global objective correlates distances-to-reference-points between the
high-dimensional data and the embedding: a Pearson term on raw distances and
a Spearman term on soft ranks of the distances, averaged. The local objective
is a multi-task cross-entropy that asks jointly-learned linear heads to
recover k-means cluster assignments from the embedding. A quadratic anchor
term supports the refinement mode.

Gradient conventions: each loss returns a LossValueGrad whose grad is taken
with respect to that operation's differentiable argument — the flat d^y
vector for pearson_loss, the N×K d^y matrix for spearman_loss, and the N×m
embedding for correlation_loss / cluster_loss / anchor_loss.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.spatial.distance import cdist

from . import softrank
from .clustering import ClusterResult
from .data import RunSeed, as_values
from .errors import DegenerateData, InvalidInput, NumericalError


@dataclass
class ReferenceSet:
    """K sampled reference indices with precomputed high-dimensional
    distances dx (N×K) and their row-wise fractional ranks rx."""

    indices: np.ndarray  # (K,) point indices
    dx: np.ndarray       # (N, K) Euclidean distances
    rx: np.ndarray       # (N, K) hard ranks of each dx row

    @classmethod
    def from_indices(cls, data, indices) -> "ReferenceSet":
        x = as_values(data)
        indices = np.asarray(indices, dtype=np.int64)
        dx = cdist(x, x[indices])
        if np.ptp(dx) == 0:
            raise DegenerateData("all reference distances are identical")
        rx = np.empty_like(dx)
        for i in range(dx.shape[0]):
            rx[i] = softrank.hard_ranks(dx[i])
        return cls(indices=indices, dx=dx, rx=rx)

    @property
    def k(self) -> int:
        return self.indices.size


@dataclass
class ClassifierHead:
    """Linear classifier for one cluster task; last weight column is the bias."""

    weights: np.ndarray  # (k, m+1)


@dataclass
class LossValueGrad:
    value: float
    grad: np.ndarray
    grad_heads: Optional[list[np.ndarray]] = None
    degenerate: bool = False


def build_reference_set(data, k_refs: int, seed: RunSeed) -> ReferenceSet:
    """Sample K reference indices uniformly without replacement (once per run)."""
    x = as_values(data)
    n = x.shape[0]
    if not (1 <= k_refs <= n):
        raise InvalidInput(f"need 1 <= K <= N, got K={k_refs}, N={n}")
    indices = seed.rng("refs").choice(n, size=k_refs, replace=False)
    return ReferenceSet.from_indices(x, indices)


def _neg_correlation(a_flat: np.ndarray, b_flat: np.ndarray):
    """Negative Pearson correlation of two flat vectors and its gradient in b.

    Returns (value, grad_b, degenerate). Zero variance in b is guarded: the
    value is 0 with a zero gradient and the degeneracy flag set. Zero variance
    in a is a precondition violation and raises.
    """
    a_c = a_flat - a_flat.mean()
    b_c = b_flat - b_flat.mean()
    a_norm = np.linalg.norm(a_c)
    b_norm = np.linalg.norm(b_c)
    if a_norm == 0:
        raise InvalidInput("first correlation argument has zero variance")
    if b_norm == 0:
        return 0.0, np.zeros_like(b_flat), True
    u = a_c / a_norm
    w = b_c / b_norm
    corr = float(u @ w)
    grad = -(u - corr * w) / b_norm
    return -corr, grad, False


def pearson_loss(dx_flat, dy_flat) -> LossValueGrad:
    """Negative Pearson correlation of the distance vectors; grad w.r.t. dy_flat."""
    dx_flat = np.asarray(dx_flat, dtype=np.float64).ravel()
    dy_flat = np.asarray(dy_flat, dtype=np.float64).ravel()
    if dx_flat.shape != dy_flat.shape or dx_flat.size < 2:
        raise InvalidInput("distance vectors must share a length >= 2")
    value, grad, degenerate = _neg_correlation(dx_flat, dy_flat)
    return LossValueGrad(value=value, grad=grad, degenerate=degenerate)


def _normalize_rows(dy: np.ndarray):
    """Divide each row by its mean where the mean is positive."""
    mu = dy.mean(axis=1, keepdims=True)
    scale = np.where(mu > 0, mu, 1.0)
    return dy / scale, scale


def spearman_loss(rx, dy, epsilon: float) -> LossValueGrad:
    """Negative Pearson correlation between hard ranks rx and soft ranks of dy.

    Each dy row is divided by its mean (when positive) before soft ranking so
    one epsilon serves all distance scales; grad is w.r.t. the dy matrix.
    """
    rx = np.asarray(rx, dtype=np.float64)
    dy = np.asarray(dy, dtype=np.float64)
    if rx.shape != dy.shape or rx.ndim != 2:
        raise InvalidInput("rx and dy must be matrices of identical shape")
    z, scale = _normalize_rows(dy)
    ry = softrank.soft_rank_rows(z, epsilon)
    rx_c = rx.ravel() - rx.mean()
    if np.linalg.norm(rx_c) == 0:
        return LossValueGrad(value=0.0, grad=np.zeros_like(dy), degenerate=True)
    value, grad_ry, degenerate = _neg_correlation(rx.ravel(), ry.ravel())
    if degenerate:
        return LossValueGrad(value=0.0, grad=np.zeros_like(dy), degenerate=True)
    grad_z = softrank.soft_rank_rows_vjp(z, epsilon, grad_ry.reshape(dy.shape))
    # chain through z = dy / mean(dy): dL/ddy_l = g_l/mu - sum_j(g_j z_j) / (K mu)
    k = dy.shape[1]
    inner = np.einsum("nk,nk->n", grad_z, z)[:, None]
    grad_dy = grad_z / scale - inner / (k * scale)
    return LossValueGrad(value=value, grad=grad_dy, degenerate=False)


def distances_to_refs(emb: np.ndarray, indices: np.ndarray) -> np.ndarray:
    """d^y: Euclidean distances from every embedded point to the reference rows."""
    with np.errstate(over="ignore"):
        dy = cdist(emb, emb[indices])
    if not np.isfinite(dy).all():
        raise NumericalError("embedding distances overflowed to non-finite values")
    return dy


def _chain_distance_grad(
    emb: np.ndarray, indices: np.ndarray, dy: np.ndarray, grad_dy: np.ndarray
) -> np.ndarray:
    """Pull a gradient in d^y back to the embedding through the Euclidean norm.

    Both end points of each pair receive a contribution; zero distances
    (including the structural self-distances at i = I_j) contribute nothing.
    """
    with np.errstate(invalid="ignore", divide="ignore"):
        w = np.where(dy > 0, grad_dy / dy, 0.0)
    diff = emb[:, None, :] - emb[indices][None, :, :]
    weighted = w[:, :, None] * diff
    grad = weighted.sum(axis=1)
    np.add.at(grad, indices, -weighted.sum(axis=0))
    return grad


def correlation_loss(refs: ReferenceSet, emb, epsilon: float) -> LossValueGrad:
    """0.5*Pearson + 0.5*Spearman of distances to the reference set; grad w.r.t. emb."""
    emb = np.asarray(emb, dtype=np.float64)
    if emb.ndim != 2 or emb.shape[0] != refs.dx.shape[0]:
        raise InvalidInput(
            f"embedding must have {refs.dx.shape[0]} rows, got shape {emb.shape}"
        )
    dy = distances_to_refs(emb, refs.indices)
    pearson = pearson_loss(refs.dx.ravel(), dy.ravel())
    spearman = spearman_loss(refs.rx, dy, epsilon)
    value = 0.5 * pearson.value + 0.5 * spearman.value
    grad_dy = 0.5 * pearson.grad.reshape(dy.shape) + 0.5 * spearman.grad
    grad_emb = _chain_distance_grad(emb, refs.indices, dy, grad_dy)
    return LossValueGrad(
        value=value,
        grad=grad_emb,
        degenerate=pearson.degenerate or spearman.degenerate,
    )


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def cluster_loss(
    tasks: Sequence[tuple[ClusterResult, ClassifierHead]], emb
) -> LossValueGrad:
    """Multi-task cross-entropy of linear heads predicting k-means assignments.

    Mean over points within a task, mean over tasks; returns gradients for the
    embedding and for every head.
    """
    emb = np.asarray(emb, dtype=np.float64)
    if not tasks:
        raise InvalidInput("cluster_loss needs at least one task")
    n, m = emb.shape
    e1 = np.concatenate([emb, np.ones((n, 1))], axis=1)
    n_tasks = len(tasks)
    total = 0.0
    grad_emb = np.zeros_like(emb)
    grad_heads = []
    for result, head in tasks:
        a = head.weights
        if a.shape != (result.k, m + 1):
            raise InvalidInput(
                f"head shape {a.shape} does not match k={result.k}, m+1={m + 1}"
            )
        logits = e1 @ a.T
        logp = _log_softmax(logits)
        targets = result.assignments
        total += -logp[np.arange(n), targets].mean()
        g_z = np.exp(logp)
        g_z[np.arange(n), targets] -= 1.0
        g_z /= n * n_tasks
        grad_emb += g_z @ a[:, :m]
        grad_heads.append(g_z.T @ e1)
    return LossValueGrad(value=total / n_tasks, grad=grad_emb, grad_heads=grad_heads)


def anchor_loss(emb, init, lam: float) -> LossValueGrad:
    """Mean squared deviation from the initial embedding, weighted by lambda."""
    emb = np.asarray(emb, dtype=np.float64)
    init = np.asarray(init, dtype=np.float64)
    if emb.shape != init.shape:
        raise InvalidInput(f"shape mismatch: {emb.shape} vs {init.shape}")
    if lam < 0:
        raise InvalidInput(f"lambda must be non-negative, got {lam}")
    if lam == 0:
        return LossValueGrad(value=0.0, grad=np.zeros_like(emb))
    diff = emb - init
    size = emb.size
    return LossValueGrad(
        value=lam * float(np.square(diff).sum()) / size,
        grad=(2.0 * lam / size) * diff,
    )
