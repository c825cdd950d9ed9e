"""k-means (Lloyd + k-means++ seeding) over the high-dimensional data.

The resulting assignments are the classification targets of the
cluster-observability loss, so the contract keeps exactly k live clusters:
empty clusters are repaired by stealing the point farthest from its centroid.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import RunSeed, as_values
from .errors import InvalidInput


@dataclass
class ClusterResult:
    k: int
    assignments: np.ndarray  # (N,) int in [0, k)
    centroids: np.ndarray    # (k, d)
    inertia: float


def _sq_dists(x: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """Squared Euclidean point-to-centroid distances, (N, k)."""
    diff = x[:, None, :] - centroids[None, :, :]
    return np.einsum("nkd,nkd->nk", diff, diff)


def _kmeans_pp_init(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    chosen = np.empty(k, dtype=np.int64)
    chosen[0] = rng.integers(n)
    d2 = np.einsum("nd,nd->n", x - x[chosen[0]], x - x[chosen[0]])
    for j in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = rng.choice(n, p=d2 / total)
        else:
            # all remaining mass at distance 0 (duplicates): pick any unchosen
            mask = np.ones(n, dtype=bool)
            mask[chosen[:j]] = False
            idx = rng.choice(np.flatnonzero(mask))
        chosen[j] = idx
        cand = np.einsum("nd,nd->n", x - x[idx], x - x[idx])
        d2 = np.minimum(d2, cand)
    return x[chosen].copy()


def _lloyd(x: np.ndarray, centroids: np.ndarray, max_iters: int):
    n, _ = x.shape
    k = centroids.shape[0]
    assign = None
    for _ in range(max_iters):
        new_assign = np.argmin(_sq_dists(x, centroids), axis=1)
        if assign is not None and np.array_equal(new_assign, assign):
            break
        assign = new_assign
        counts = np.bincount(assign, minlength=k)
        sums = np.zeros_like(centroids)
        np.add.at(sums, assign, x)
        empties = np.flatnonzero(counts == 0)
        if empties.size:
            # steal the point currently farthest from its assigned centroid
            point_d2 = np.einsum("nd,nd->n", x - centroids[assign], x - centroids[assign])
            taken = np.zeros(n, dtype=bool)
            for c in empties:
                cand = np.where(taken, -np.inf, point_d2)
                far = int(np.argmax(cand))
                taken[far] = True
                old = assign[far]
                sums[old] -= x[far]
                counts[old] -= 1
                sums[c] += x[far]
                counts[c] += 1
                assign[far] = c
        centroids = sums / counts[:, None]
    final_assign = np.argmin(_sq_dists(x, centroids), axis=1)
    inertia = float(
        np.einsum("nd,nd->n", x - centroids[final_assign], x - centroids[final_assign]).sum()
    )
    return final_assign, centroids, inertia


def kmeans_fit(
    data,
    k: int,
    seed: RunSeed,
    max_iters: int = 100,
    n_init: int = 4,
) -> ClusterResult:
    """Lowest-inertia result over n_init k-means++ restarts of Lloyd's algorithm.

    Deterministic for a fixed seed; distance ties go to the lowest cluster id.
    """
    x = as_values(data)
    n = x.shape[0]
    if k < 1:
        raise InvalidInput(f"k must be >= 1, got {k}")
    if k > n:
        raise InvalidInput(f"k={k} exceeds the number of points N={n}")
    best = None
    for restart in range(n_init):
        rng = seed.rng("kmeans", k, "restart", restart)
        init = _kmeans_pp_init(x, k, rng)
        assign, centroids, inertia = _lloyd(x, init, max_iters)
        if best is None or inertia < best[2]:
            best = (assign, centroids, inertia)
    assign, centroids, inertia = best
    return ClusterResult(k=k, assignments=assign, centroids=centroids, inertia=inertia)


def predict_cluster(result: ClusterResult, point) -> int:
    """Id of the nearest centroid; exact ties go to the lowest id."""
    point = np.asarray(point, dtype=np.float64)
    if point.shape != (result.centroids.shape[1],):
        raise InvalidInput(
            f"point has dimension {point.shape}, centroids expect {result.centroids.shape[1]}"
        )
    d2 = np.einsum("kd,kd->k", result.centroids - point, result.centroids - point)
    return int(np.argmin(d2))
