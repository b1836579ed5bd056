"""k-means with k-means++ seeding for cluster-local calibration.

Deterministic given the seed: initialization draws from a seeded
generator and Lloyd updates are order-independent. Inertia is recorded at
every assignment step; with the mean update and empty-cluster repair it
can never increase, which the fit asserts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .backends import kernels
from .errors import InvalidKError, ShapeError

DEFAULT_MAX_ITERS = 100
DEFAULT_TOL = 1e-8


@dataclass(frozen=True)
class KMeansModel:
    """Fitted centroids with training assignments and inertia history."""

    centroids: np.ndarray
    assignments: np.ndarray
    inertia: float
    inertia_history: tuple

    def __post_init__(self):
        c = np.ascontiguousarray(self.centroids, dtype=np.float64)
        a = np.ascontiguousarray(self.assignments, dtype=np.int64)
        c.setflags(write=False)
        a.setflags(write=False)
        object.__setattr__(self, "centroids", c)
        object.__setattr__(self, "assignments", a)

    @property
    def k(self) -> int:
        return self.centroids.shape[0]

    @property
    def dim(self) -> int:
        return self.centroids.shape[1]


def default_k(n: int) -> int:
    """Cluster count when unspecified: ceil(sqrt(n/50)) clamped to [2, 64].

    Keeps roughly 50+ points per cluster so per-cluster quantiles stay
    informative; callers still cap at n.
    """
    k = math.ceil(math.sqrt(n / 50.0))
    return max(2, min(64, k))


def _plusplus_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    centroids = np.empty((k, points.shape[1]), dtype=np.float64)
    first = int(rng.integers(n))
    centroids[0] = points[first]
    if k == 1:
        return centroids
    d2 = kernels.sq_dists(points, centroids[:1])[:, 0]
    for j in range(1, k):
        total = float(d2.sum())
        if total <= 0.0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centroids[j] = points[idx]
        if j + 1 < k:
            d2 = np.minimum(d2, kernels.sq_dists(points, centroids[j : j + 1])[:, 0])
    return centroids


def kmeans_fit(
    points,
    k: int,
    seed: int,
    max_iters: int = DEFAULT_MAX_ITERS,
    tol: float = DEFAULT_TOL,
) -> KMeansModel:
    """Lloyd's algorithm from a k-means++ start.

    Emptied clusters are reseeded at the point farthest from its assigned
    centroid, so every cluster owns calibration mass after the fit.
    """
    points = np.ascontiguousarray(points, dtype=np.float64)
    if points.ndim != 2:
        raise ShapeError(f"points must be 2-D, got shape {points.shape}")
    n = points.shape[0]
    if not 1 <= k <= n:
        raise InvalidKError(f"k must lie in [1, {n}], got {k}")
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")

    rng = np.random.default_rng(seed)
    centroids = _plusplus_init(points, k, rng)
    history = []
    labels = None
    for _ in range(max_iters):
        labels, sqd = kernels.assign_nearest(points, centroids)
        inertia = float(sqd.sum())
        if history and inertia > history[-1] + 1e-9:
            raise AssertionError(
                f"inertia increased across Lloyd iterations: {history[-1]} -> {inertia}"
            )
        history.append(inertia)

        new_centroids = centroids.copy()
        counts = np.bincount(labels, minlength=k)
        sums = np.zeros_like(centroids)
        np.add.at(sums, labels, points)
        occupied = counts > 0
        new_centroids[occupied] = sums[occupied] / counts[occupied, None]

        # Empty-cluster repair: claim the point farthest from its centroid.
        if not occupied.all():
            claimable = sqd.copy()
            for j in np.nonzero(~occupied)[0]:
                far = int(np.argmax(claimable))
                new_centroids[j] = points[far]
                claimable[far] = -1.0

        shift = float(np.max(np.sqrt(((new_centroids - centroids) ** 2).sum(axis=1))))
        centroids = new_centroids
        if shift < tol:
            break

    labels, sqd = kernels.assign_nearest(points, centroids)
    inertia = float(sqd.sum())
    if history and inertia > history[-1] + 1e-9:
        raise AssertionError("inertia increased at the final assignment")
    history.append(inertia)
    return KMeansModel(
        centroids=centroids,
        assignments=labels,
        inertia=inertia,
        inertia_history=tuple(history),
    )


def assign_cluster(model: KMeansModel, x) -> int:
    """Nearest centroid for one vector; ties go to the lower cluster index."""
    labels = assign_clusters(model, np.asarray(x, dtype=np.float64)[None, :])
    return int(labels[0])


def assign_clusters(model: KMeansModel, xs) -> np.ndarray:
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    if xs.ndim != 2 or xs.shape[1] != model.dim:
        raise ShapeError(f"queries must have shape (m, {model.dim}), got {xs.shape}")
    labels, _ = kernels.assign_nearest(xs, model.centroids)
    return labels
