"""Embedding-quality metrics.

Local metrics (trustworthiness, continuity, mean relative rank errors) are
computed from full neighbor-rank tables; global metrics correlate pairwise
distances between the original space and the embedding, sampling pairs when
the full set would be too large.

All metrics are oriented so that 1.0 is best. In particular the two MRRE
variants are reported as 1 - error, so a perfect embedding scores 1.0 on
every column of a report.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.spatial.distance import cdist, pdist

from . import softrank
from .data import RunSeed, as_values
from .errors import DegenerateData, InvalidInput

DEFAULT_NEIGHBORS = 25
DEFAULT_MAX_PAIRS = 2_000_000


@dataclass
class NeighborRanks:
    """Row i orders all points by distance from i (self first, ties by index);
    ranks[i, j] is the position of j in that ordering, so the nearest true
    neighbor has rank 1."""

    order: np.ndarray
    ranks: np.ndarray


def ranked_neighbors(points) -> NeighborRanks:
    x = as_values(points)
    sq = cdist(x, x, metric="sqeuclidean")
    np.fill_diagonal(sq, -1.0)  # self sorts first regardless of duplicates
    order = np.argsort(sq, axis=1, kind="stable")
    n = x.shape[0]
    ranks = np.empty((n, n), dtype=np.int64)
    positions = np.arange(n, dtype=np.int64)
    for i in range(n):
        ranks[i, order[i]] = positions
    return NeighborRanks(order=order, ranks=ranks)


def _check_k(n: int, k: int) -> None:
    if not 1 <= k < n / 2:
        raise InvalidInput(f"need 1 <= k < N/2 with N={n}, got k={k}")


def trustworthiness(rank_x: NeighborRanks, rank_y: NeighborRanks, k: int) -> float:
    """Penalize intruders: embedding neighbors that are far in the original space."""
    n = rank_x.ranks.shape[0]
    _check_k(n, k)
    knn_y = rank_y.order[:, 1 : k + 1]
    rho_x = np.take_along_axis(rank_x.ranks, knn_y, axis=1)
    penalty = np.maximum(rho_x - k, 0).sum()
    return 1.0 - 2.0 / (n * k * (2 * n - 3 * k - 1)) * penalty


def continuity(rank_x: NeighborRanks, rank_y: NeighborRanks, k: int) -> float:
    """Penalize missing points: original neighbors that the embedding pushes away."""
    return trustworthiness(rank_y, rank_x, k)


def mrre(rank_x: NeighborRanks, rank_y: NeighborRanks, k: int) -> tuple[float, float]:
    """Mean relative rank errors, returned as (1 - false, 1 - missing).

    The "false" variant averages |rho_x - rho_y| / rho_y over embedding-space
    neighborhoods; "missing" swaps the roles. Both are normalized by the
    worst attainable sum so the error part lies in [0, 1].
    """
    n = rank_x.ranks.shape[0]
    _check_k(n, k)
    ell = np.arange(1, k + 1, dtype=np.float64)
    c = n * (np.abs(n - 2.0 * ell + 1.0) / ell).sum()

    knn_y = rank_y.order[:, 1 : k + 1]
    rho_x = np.take_along_axis(rank_x.ranks, knn_y, axis=1).astype(np.float64)
    rho_y = np.take_along_axis(rank_y.ranks, knn_y, axis=1).astype(np.float64)
    false_err = (np.abs(rho_x - rho_y) / rho_y).sum() / c

    knn_x = rank_x.order[:, 1 : k + 1]
    rho_x2 = np.take_along_axis(rank_x.ranks, knn_x, axis=1).astype(np.float64)
    rho_y2 = np.take_along_axis(rank_y.ranks, knn_x, axis=1).astype(np.float64)
    missing_err = (np.abs(rho_y2 - rho_x2) / rho_x2).sum() / c

    return 1.0 - false_err, 1.0 - missing_err


def _pair_sample(n: int, max_pairs: int, seed: RunSeed):
    """Indices (i, j), i < j: every pair when feasible, else a uniform sample
    of distinct pairs drawn without replacement."""
    total = n * (n - 1) // 2
    if total <= max_pairs:
        iu = np.triu_indices(n, k=1)
        return iu[0].astype(np.int64), iu[1].astype(np.int64)
    rng = seed.rng("pairs")
    chosen = np.empty(0, dtype=np.int64)
    while chosen.size < max_pairs:
        draw = rng.integers(0, n, size=(2, max_pairs), dtype=np.int64)
        lo = draw.min(axis=0)
        hi = draw.max(axis=0)
        ids = lo * n + hi
        ids = ids[lo != hi]
        chosen = np.unique(np.concatenate([chosen, ids]))
    chosen = rng.permutation(chosen)[:max_pairs]
    return chosen // n, chosen % n


def global_correlation(
    x_points,
    y_points,
    seed: RunSeed,
    max_pairs: int = DEFAULT_MAX_PAIRS,
) -> tuple[float, float]:
    """(Pearson, Spearman) correlation of pairwise distances across spaces.

    Spearman is the Pearson correlation of fractional ranks of the same
    distance vectors, so ties are averaged.
    """
    x = as_values(x_points)
    y = as_values(y_points)
    n = x.shape[0]
    if y.shape[0] != n:
        raise InvalidInput(f"row mismatch: {n} vs {y.shape[0]}")
    if n < 3:
        raise InvalidInput(f"need at least 3 points, got {n}")
    if max_pairs < 2:
        raise InvalidInput(f"max_pairs must be >= 2, got {max_pairs}")
    total = n * (n - 1) // 2
    if total <= max_pairs:
        dx = pdist(x)
        dy = pdist(y)
    else:
        i_idx, j_idx = _pair_sample(n, max_pairs, seed)
        dx = np.linalg.norm(x[i_idx] - x[j_idx], axis=1)
        dy = np.linalg.norm(y[i_idx] - y[j_idx], axis=1)
    pearson = _safe_corr(dx, dy)
    spearman = _safe_corr(softrank.hard_ranks(dx), softrank.hard_ranks(dy))
    return pearson, spearman


def _safe_corr(a: np.ndarray, b: np.ndarray) -> float:
    a_c = a - a.mean()
    b_c = b - b.mean()
    denom = np.linalg.norm(a_c) * np.linalg.norm(b_c)
    if denom == 0:
        raise DegenerateData("pairwise distances are constant in one space")
    return float(a_c @ b_c / denom)


@dataclass
class MetricReport:
    trustworthiness: float
    continuity: float
    mrre_false: float
    mrre_missing: float
    global_pearson: float
    global_spearman: float
    n_points: int
    k_neighbors: int

    @property
    def ls_avg(self) -> float:
        """Average of the four local metrics."""
        return 0.25 * (
            self.trustworthiness + self.continuity + self.mrre_false + self.mrre_missing
        )

    @property
    def gs_avg(self) -> float:
        """Average of the two global distance correlations."""
        return 0.5 * (self.global_pearson + self.global_spearman)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ls_avg"] = self.ls_avg
        d["gs_avg"] = self.gs_avg
        return d


def evaluate(
    x_points,
    y_points,
    seed: RunSeed,
    k: int = DEFAULT_NEIGHBORS,
    max_pairs: int = DEFAULT_MAX_PAIRS,
) -> MetricReport:
    """Full metric suite comparing an embedding y to its source data x."""
    x = as_values(x_points)
    y = as_values(y_points)
    if x.shape[0] != y.shape[0]:
        raise InvalidInput(f"row mismatch: {x.shape[0]} vs {y.shape[0]}")
    _check_k(x.shape[0], k)
    rank_x = ranked_neighbors(x)
    rank_y = ranked_neighbors(y)
    trust = trustworthiness(rank_x, rank_y, k)
    cont = continuity(rank_x, rank_y, k)
    m_false, m_missing = mrre(rank_x, rank_y, k)
    pearson, spearman = global_correlation(x, y, seed, max_pairs)
    return MetricReport(
        trustworthiness=trust,
        continuity=cont,
        mrre_false=m_false,
        mrre_missing=m_missing,
        global_pearson=pearson,
        global_spearman=spearman,
        n_points=x.shape[0],
        k_neighbors=k,
    )
