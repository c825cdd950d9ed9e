"""Dimensionality reduction by joint optimization of a global
distance-correlation objective and a cluster-observability objective,
with a refinement mode for embeddings produced elsewhere, a PCA baseline,
and a rank-based embedding-quality metric suite.

This top-level module deliberately imports nothing heavy: the CLI must be
able to pin thread counts before numpy first loads. Submodules are loaded
on attribute access instead.
"""
from __future__ import annotations

import importlib

__version__ = "0.1.0"

_SUBMODULES = frozenset(
    {
        "cli",
        "clustering",
        "data",
        "datasets",
        "errors",
        "losses",
        "metrics",
        "pca",
        "plotting",
        "softrank",
        "trainer",
    }
)

__all__ = sorted(_SUBMODULES | {"__version__"})


def __getattr__(name: str):
    if name in _SUBMODULES:
        return importlib.import_module(f".{name}", __name__)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
