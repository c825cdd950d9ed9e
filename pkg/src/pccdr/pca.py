"""PCA baseline via singular value decomposition."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import as_values
from .errors import InvalidInput


@dataclass
class PcaModel:
    mean: np.ndarray                # (d,)
    components: np.ndarray          # (m, d) rows are principal axes
    explained_variance: np.ndarray  # (m,)

    def transform(self, data) -> np.ndarray:
        x = as_values(data)
        if x.shape[1] != self.mean.size:
            raise InvalidInput(
                f"expected {self.mean.size} columns, got {x.shape[1]}"
            )
        return (x - self.mean) @ self.components.T


def pca_fit_transform(data, n_components: int) -> tuple[PcaModel, np.ndarray]:
    """Project onto the top principal components of the centered data.

    Sign convention: each component is flipped so its largest-magnitude entry
    is positive, which makes results reproducible across LAPACK builds.
    """
    x = as_values(data)
    n, d = x.shape
    if not (1 <= n_components <= min(n, d)):
        raise InvalidInput(
            f"need 1 <= n_components <= min(N, d) = {min(n, d)}, got {n_components}"
        )
    mean = x.mean(axis=0)
    centered = x - mean
    _, s, vt = np.linalg.svd(centered, full_matrices=False)
    components = vt[:n_components]
    flip = np.sign(components[np.arange(n_components),
                              np.abs(components).argmax(axis=1)])
    flip[flip == 0] = 1.0
    components = components * flip[:, None]
    variance = (s[:n_components] ** 2) / max(n - 1, 1)
    model = PcaModel(mean=mean, components=components, explained_variance=variance)
    return model, centered @ components.T
