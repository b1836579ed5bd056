"""Gaussian kernel density estimation and clipped density ratios.

Deliberately simple: a product-Gaussian kernel with a diagonal rule-of-
thumb bandwidth. High-dimensional ratio estimation is expected to behave
poorly with this estimator; the harness exploits exactly that to contrast
oracle and estimated importance weights.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backends import kernels
from .errors import InsufficientDataError, ShapeError

BANDWIDTH_FLOOR = 1e-6

BANDWIDTH_RULES = ("scott", "silverman")


@dataclass(frozen=True)
class KdeModel:
    """Fitted KDE: sample matrix plus one positive bandwidth per dimension."""

    points: np.ndarray
    bandwidth: np.ndarray

    def __post_init__(self):
        pts = np.ascontiguousarray(self.points, dtype=np.float64)
        bw = np.ascontiguousarray(self.bandwidth, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[0] < 2:
            raise InsufficientDataError("KDE needs a 2-D sample with at least 2 points")
        if bw.shape != (pts.shape[1],) or np.any(bw <= 0):
            raise ShapeError("bandwidth must be positive, one entry per dimension")
        pts.setflags(write=False)
        bw.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "bandwidth", bw)

    @property
    def dim(self) -> int:
        return self.points.shape[1]


def fit_kde(points, rule: str = "scott") -> KdeModel:
    """Fit a diagonal-bandwidth Gaussian KDE with a rule-of-thumb bandwidth.

    Scott: h_j = sigma_j * n^(-1/(d+4)). Silverman: the same with the
    extra (4/(d+2))^(1/(d+4)) factor. Per-dimension standard deviations
    are floored at 1e-6 so degenerate dimensions stay usable.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2:
        raise ShapeError(f"points must be 2-D, got shape {points.shape}")
    n, d = points.shape
    if n < 2:
        raise InsufficientDataError(f"need at least 2 points to fit a KDE, got {n}")
    if not np.all(np.isfinite(points)):
        raise ValueError("points must be finite")
    if rule not in BANDWIDTH_RULES:
        raise ValueError(f"unknown bandwidth rule {rule!r}; expected one of {BANDWIDTH_RULES}")
    sigma = np.maximum(points.std(axis=0, ddof=1), BANDWIDTH_FLOOR)
    factor = float(n) ** (-1.0 / (d + 4))
    if rule == "silverman":
        factor *= (4.0 / (d + 2)) ** (1.0 / (d + 4))
    bandwidth = np.maximum(sigma * factor, BANDWIDTH_FLOOR)
    return KdeModel(points=points, bandwidth=bandwidth)


def _as_queries(model: KdeModel, x) -> tuple:
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != model.dim:
        raise ShapeError(f"query dimension {x.shape} incompatible with d={model.dim}")
    return x, single


def kde_logdensity(model: KdeModel, x):
    """Log density at one query vector or a batch of query rows."""
    queries, single = _as_queries(model, x)
    out = kernels.kde_logdensity(model.points, queries, model.bandwidth)
    return float(out[0]) if single else out


def kde_density(model: KdeModel, x):
    """Density at ``x``; strictly positive (computed in log space)."""
    out = np.exp(kde_logdensity(model, x))
    if np.isscalar(out) or out.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class DensityRatioModel:
    """Clipped ratio of two KDE densities, test over calibration."""

    kde_cal: KdeModel
    kde_test: KdeModel
    clip: float = 20.0

    def __post_init__(self):
        if self.kde_cal.dim != self.kde_test.dim:
            raise ShapeError("calibration and test KDEs must share a dimension")
        if self.clip < 1.0:
            raise ValueError(f"clip must be >= 1, got {self.clip}")


def density_ratio(model: DensityRatioModel, x):
    """Estimated p_test(x) / p_cal(x), clamped to [1/clip, clip]."""
    queries, single = _as_queries(model.kde_cal, x)
    log_ratio = kernels.kde_logdensity(
        model.kde_test.points, queries, model.kde_test.bandwidth
    ) - kernels.kde_logdensity(model.kde_cal.points, queries, model.kde_cal.bandwidth)
    ratio = np.clip(np.exp(log_ratio), 1.0 / model.clip, model.clip)
    return float(ratio[0]) if single else ratio
