"""Synthetic datasets for experiments and tests."""
from __future__ import annotations

import numpy as np

from .data import DataMatrix, RunSeed
from .errors import InvalidInput

SWISS_T_MIN = 1.5 * np.pi
SWISS_T_MAX = 4.5 * np.pi
SWISS_HEIGHT = 21.0
SWISS_LABEL_BINS = 16


def make_swiss_roll(n: int, noise: float, seed: RunSeed) -> DataMatrix:
    """Classic 3-D swiss roll: (t*cos t, h, t*sin t) with isotropic noise.

    The roll parameter t is uniform on [1.5*pi, 4.5*pi] and the height h on
    [0, 21]. Because labels are integers, t is quantized into 16 equal-width
    bins, which keeps a coarse ordering along the manifold for coloring; at
    noise=0 the exact t of a point is recoverable as hypot(x, z).
    """
    if n < 1:
        raise InvalidInput(f"need n >= 1, got {n}")
    if noise < 0:
        raise InvalidInput(f"noise must be non-negative, got {noise}")
    rng = seed.rng("swiss")
    t = rng.uniform(SWISS_T_MIN, SWISS_T_MAX, size=n)
    h = rng.uniform(0.0, SWISS_HEIGHT, size=n)
    points = np.stack([t * np.cos(t), h, t * np.sin(t)], axis=1)
    if noise > 0:
        points = points + noise * rng.standard_normal((n, 3))
    edges = np.linspace(SWISS_T_MIN, SWISS_T_MAX, SWISS_LABEL_BINS + 1)
    labels = np.clip(np.digitize(t, edges[1:-1]), 0, SWISS_LABEL_BINS - 1)
    return DataMatrix(values=points, labels=labels.astype(np.int64))


def random_centers(
    count: int, dim: int, seed: RunSeed, box: float = 10.0
) -> np.ndarray:
    """Blob centers drawn uniformly from [-box, box]^dim."""
    if count < 1 or dim < 1:
        raise InvalidInput("count and dim must be positive")
    return seed.rng("centers").uniform(-box, box, size=(count, dim))


def make_blobs(n: int, centers, std: float, seed: RunSeed) -> DataMatrix:
    """Isotropic Gaussian blobs around the given center vectors.

    Points are split as evenly as possible across centers (counts differ by
    at most one); the label of a point is the index of its center.
    """
    centers = np.asarray(centers, dtype=np.float64)
    if centers.ndim != 2 or centers.shape[0] == 0:
        raise InvalidInput("centers must be a non-empty (c, d) array")
    c = centers.shape[0]
    if n < c:
        raise InvalidInput(f"need n >= number of centers, got n={n}, centers={c}")
    if std < 0:
        raise InvalidInput(f"std must be non-negative, got {std}")
    rng = seed.rng("blobs")
    counts = np.full(c, n // c, dtype=np.int64)
    counts[: n % c] += 1
    labels = np.repeat(np.arange(c, dtype=np.int64), counts)
    points = centers[labels]
    if std > 0:
        points = points + std * rng.standard_normal((n, centers.shape[1]))
    return DataMatrix(values=points, labels=labels)
