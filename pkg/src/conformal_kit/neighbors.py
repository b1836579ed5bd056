"""Exact nearest-neighbour search in embedding space and neighbour weights.

The index is brute force on purpose: calibration sets at the scale this
package targets fit comfortably, and the exactness is what the oracle
tests pin down. A faster index can be swapped in behind the same contract.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .backends import kernels
from .errors import ConfigurationError, InvalidKError, ShapeError

WEIGHT_FLOOR = 1e-12
MEDIAN_BANDWIDTH_FLOOR = 1e-9

WEIGHT_KINDS = ("uniform-knn", "gaussian-kernel-knn")


@dataclass(frozen=True)
class NeighborIndex:
    """Immutable matrix of calibration embeddings, Euclidean metric."""

    embeddings: np.ndarray

    def __post_init__(self):
        emb = np.ascontiguousarray(self.embeddings, dtype=np.float64)
        if emb.ndim != 2 or emb.shape[0] < 1:
            raise ShapeError("embeddings must be a non-empty 2-D matrix")
        if not np.all(np.isfinite(emb)):
            raise ValueError("embeddings must be finite")
        emb.setflags(write=False)
        object.__setattr__(self, "embeddings", emb)

    def __len__(self) -> int:
        return self.embeddings.shape[0]

    @property
    def dim(self) -> int:
        return self.embeddings.shape[1]


@dataclass(frozen=True)
class WeightScheme:
    """How neighbour similarity turns into calibration weights.

    ``kernel_bandwidth`` may be a positive float or ``"median-distance"``,
    which uses the per-query median neighbour distance (floored at 1e-9).
    """

    kind: str = "uniform-knn"
    k: int = 100
    kernel_bandwidth: Union[float, str] = "median-distance"

    def __post_init__(self):
        if self.kind not in WEIGHT_KINDS:
            raise ConfigurationError(f"unknown weight kind {self.kind!r}")
        if self.k < 1:
            raise ConfigurationError(f"k must be positive, got {self.k}")
        if isinstance(self.kernel_bandwidth, str):
            if self.kernel_bandwidth != "median-distance":
                raise ConfigurationError(
                    f"unknown bandwidth rule {self.kernel_bandwidth!r}"
                )
        elif not self.kernel_bandwidth > 0:
            raise ConfigurationError("kernel bandwidth must be positive")


def knn(index: NeighborIndex, query, k: int):
    """k nearest calibration points for one query.

    Returns a list of (calibration index, Euclidean distance) pairs with
    non-decreasing distances; exact ties resolve to the lower index.
    """
    idx, dist = knn_batch(index, np.asarray(query, dtype=np.float64)[None, :], k)
    return list(zip(idx[0].tolist(), dist[0].tolist()))


def knn_batch(index: NeighborIndex, queries, k: int):
    """Vectorised k-NN for query rows; returns (idx, dist) of shape (m, k)."""
    n = len(index)
    if not 1 <= k <= n:
        raise InvalidKError(f"k must lie in [1, {n}], got {k}")
    queries = np.ascontiguousarray(queries, dtype=np.float64)
    if queries.ndim != 2 or queries.shape[1] != index.dim:
        raise ShapeError(
            f"queries must have shape (m, {index.dim}), got {queries.shape}"
        )
    return kernels.knn(index.embeddings, queries, k)


def resolve_bandwidth(distances: np.ndarray, scheme: WeightScheme) -> np.ndarray:
    """Per-query kernel bandwidth; median rule adapts to local density."""
    if isinstance(scheme.kernel_bandwidth, str):
        bw = np.median(distances, axis=-1)
        return np.maximum(bw, MEDIAN_BANDWIDTH_FLOOR)
    return np.full(distances.shape[:-1], float(scheme.kernel_bandwidth))


def neighbor_weights(neighbors, scheme: WeightScheme) -> np.ndarray:
    """Non-negative weights for a single query's neighbour list."""
    if len(neighbors) == 0:
        raise ValueError("neighbors must be non-empty")
    dist = np.asarray([d for _, d in neighbors], dtype=np.float64)
    return neighbor_weights_batch(dist[None, :], scheme)[0]


def neighbor_weights_batch(distances: np.ndarray, scheme: WeightScheme) -> np.ndarray:
    """Weights for (m, k) neighbour distances; never all zero per row."""
    distances = np.asarray(distances, dtype=np.float64)
    if scheme.kind == "uniform-knn":
        return np.ones_like(distances)
    bw = resolve_bandwidth(distances, scheme)
    w = np.exp(-(distances**2) / (2.0 * bw[..., None] ** 2))
    return np.maximum(w, WEIGHT_FLOOR)
