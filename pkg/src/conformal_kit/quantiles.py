"""Empirical and weighted quantiles of calibration scores.

Two quantile rules live here, each matching the construction under which
its coverage guarantee is proved:

* ``conformal_quantile`` applies the finite-sample corrected order
  statistic: the k-th smallest score with k = ceil((n+1)(1-alpha)). When
  k exceeds n there is no valid threshold and the result is the infinite
  sentinel (prediction sets become the full label set).
* ``weighted_quantile`` is the literal infimum of the weighted empirical
  CDF: the smallest score q with sum of normalized weights of scores <= q
  reaching 1-alpha. An optional ``extra_mass`` atom at +infinity supports
  the weighted-CP test-point mass; when that atom is heavy enough that the
  finite scores can never reach 1-alpha, the sentinel is returned.

The sentinel is an explicit state on :class:`Threshold`, never a bare
float infinity handed to report files.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    DegenerateWeightsError,
    EmptyCalibrationError,
    InvalidWeightError,
)

__all__ = [
    "Threshold",
    "conformal_quantile",
    "corrected_rank",
    "weighted_quantile",
    "weighted_quantile_rows",
]


@dataclass(frozen=True)
class Threshold:
    """A calibrated score threshold, either finite or the full-set sentinel."""

    value: float
    infinite: bool = False

    @classmethod
    def finite(cls, value: float) -> "Threshold":
        value = float(value)
        if not math.isfinite(value):
            raise ValueError("finite threshold required")
        return cls(value, False)

    @classmethod
    def full_set(cls) -> "Threshold":
        return cls(math.inf, True)

    def as_float(self) -> float:
        return math.inf if self.infinite else self.value

    def to_json(self):
        return {"infinite": True} if self.infinite else {"value": self.value}

    @classmethod
    def from_json(cls, obj) -> "Threshold":
        if obj.get("infinite"):
            return cls.full_set()
        return cls.finite(obj["value"])


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")


def corrected_rank(n: int, alpha: float) -> int:
    """ceil((n+1)(1-alpha)), evaluated exactly in rational arithmetic.

    Exactness matters at boundaries where (n+1)(1-alpha) is an integer:
    float rounding there would silently shift the order statistic.
    """
    return math.ceil((n + 1) * (1 - Fraction(alpha)))


def conformal_quantile(scores, alpha: float, *, correction: bool = True) -> Threshold:
    """Finite-sample conformal quantile of calibration scores.

    Parameters
    ----------
    scores : array-like
        Calibration nonconformity scores, at least one.
    alpha : float
        Target miscoverage in (0, 1).
    correction : bool
        Apply the (n+1) finite-sample correction (default). With
        ``False`` the plain ceil(n(1-alpha)) empirical rank is used.

    Returns
    -------
    Threshold
        k-th smallest score, or the full-set sentinel when k > n.
    """
    _check_alpha(alpha)
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 1:
        raise ValueError("scores must be 1-D")
    n = scores.shape[0]
    if n == 0:
        raise EmptyCalibrationError("need at least one calibration score")
    if correction:
        k = corrected_rank(n, alpha)
    else:
        k = max(1, math.ceil(n * (1 - Fraction(alpha))))
    if k > n:
        return Threshold.full_set()
    return Threshold.finite(np.sort(scores, kind="stable")[k - 1])


def _validate_weights(weights: np.ndarray) -> None:
    if np.any(weights < 0):
        raise InvalidWeightError("weights must be non-negative")
    if not np.all(np.isfinite(weights)):
        raise InvalidWeightError("weights must be finite")
    if float(weights.sum()) <= 0.0:
        raise DegenerateWeightsError("total weight must be positive")


def weighted_quantile(scores, weights, alpha: float, *, extra_mass: float = 0.0) -> Threshold:
    """Infimum-form weighted (1-alpha) quantile of scores.

    ``extra_mass`` adds a virtual atom at +infinity (the weighted-CP
    test-point mass). The result is the sentinel exactly when the finite
    scores cannot accumulate 1-alpha of the total mass.
    """
    _check_alpha(alpha)
    scores = np.asarray(scores, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    if scores.shape != weights.shape or scores.ndim != 1:
        raise ValueError("scores and weights must be 1-D of equal length")
    if scores.shape[0] == 0:
        raise EmptyCalibrationError("need at least one calibration score")
    _validate_weights(weights)
    if extra_mass < 0:
        raise InvalidWeightError("extra_mass must be non-negative")
    values, inf_mask = weighted_quantile_rows(
        scores[None, :], weights[None, :], alpha, extra_mass=np.array([extra_mass])
    )
    if inf_mask[0]:
        return Threshold.full_set()
    return Threshold.finite(values[0])


def weighted_quantile_rows(scores, weights, alpha: float, *, extra_mass=0.0):
    """Row-wise weighted quantiles for batched queries.

    Parameters
    ----------
    scores, weights : ndarray, shape (m, k)
    alpha : float
    extra_mass : scalar or ndarray of shape (m,)
        Per-row virtual atom at +infinity.

    Returns
    -------
    (values, infinite) : ndarray (m,), ndarray bool (m,)
        ``values`` entries are undefined (inf) where ``infinite`` is set.

    Notes
    -----
    Inputs are assumed validated. The scalar :func:`weighted_quantile` is
    a single-row call of this function, so both paths share bit-identical
    arithmetic: stable sort, sequential cumulative sum, first index where
    the cumulative weight reaches (1-alpha) * total mass. Tied scores are
    handled by the inf definition itself: selecting any index inside a
    tie group yields the same score value.
    """
    _check_alpha(alpha)
    scores = np.asarray(scores, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    m, k = scores.shape
    order = np.argsort(scores, axis=1, kind="stable")
    s = np.take_along_axis(scores, order, axis=1)
    w = np.take_along_axis(weights, order, axis=1)
    cw = np.cumsum(w, axis=1)
    total = cw[:, -1] + np.asarray(extra_mass, dtype=np.float64)
    target = (1.0 - alpha) * total
    pos = (cw < target[:, None]).sum(axis=1)
    infinite = pos >= k
    safe = np.minimum(pos, k - 1)
    values = s[np.arange(m), safe]
    values = np.where(infinite, np.inf, values)
    return values, infinite
