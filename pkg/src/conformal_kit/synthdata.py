"""Synthetic scenario generators with oracle access to the data process.

Three kinds:

* ``iid`` — every split drawn from one Gaussian-mixture marginal, labels
  from a fixed smooth conditional.
* ``covariate-shift`` — the test split's feature marginal is a translated
  (and optionally re-weighted) copy of the calibration mixture while the
  label conditional stays fixed, so P(Y|X) is shared exactly and the
  density ratio has a closed form.
* ``patient-shift`` — features are class anchor + per-patient random
  effect + noise; patients are disjoint across splits and the test
  cohort's effect distribution is displaced, giving a severity dial from
  i.i.d. (effect scale 0) to strongly shifted.

Label conditional for the first two kinds: softmax of squared distances
to the class anchors, with an optional heteroscedastic temperature that
grows along the first feature axis. Shifting test mass toward that noisy
region is what makes global calibration misbehave in a controlled way.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import Dataset, Record, SPLITS
from .errors import ConfigurationError, UnsupportedScenarioError

SCENARIO_KINDS = ("iid", "covariate-shift", "patient-shift")

SPLIT_FRACTIONS = (
    Fraction(60, 100),
    Fraction(10, 100),
    Fraction(15, 100),
    Fraction(15, 100),
)


@dataclass(frozen=True)
class ScenarioConfig:
    kind: str
    dim: int = 4
    n_classes: int = 4
    class_sep: float = 3.0
    x_std: float = 1.0
    label_noise: float = 1.0
    hetero_gain: float = 0.0
    shift: tuple = ()
    test_weights: tuple | None = None
    n_patients: int = 200
    effect_scale: float = 0.0
    cohort_shift: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in SCENARIO_KINDS:
            raise ConfigurationError(f"unknown scenario kind {self.kind!r}")
        if self.dim < 1 or self.n_classes < 2:
            raise ConfigurationError("need dim >= 1 and n_classes >= 2")
        if self.x_std <= 0 or self.label_noise <= 0:
            raise ConfigurationError("x_std and label_noise must be positive")
        if self.hetero_gain < 0 or self.effect_scale < 0:
            raise ConfigurationError("hetero_gain and effect_scale must be non-negative")
        if self.seed < 0:
            raise ConfigurationError("seed must be non-negative")
        shift = tuple(float(v) for v in self.shift)
        if shift and len(shift) != self.dim:
            raise ConfigurationError(f"shift must have {self.dim} entries")
        object.__setattr__(self, "shift", shift)
        if self.test_weights is not None:
            w = tuple(float(v) for v in self.test_weights)
            if len(w) != self.n_classes or any(v < 0 for v in w) or sum(w) <= 0:
                raise ConfigurationError("test_weights must be non-negative per component")
            object.__setattr__(self, "test_weights", tuple(v / sum(w) for v in w))
        if self.kind == "patient-shift" and self.n_patients < 8:
            raise ConfigurationError("patient-shift needs at least 8 patients")

    def shift_vector(self) -> np.ndarray:
        if self.shift:
            return np.asarray(self.shift, dtype=np.float64)
        return np.zeros(self.dim, dtype=np.float64)


def class_anchors(cfg: ScenarioConfig) -> np.ndarray:
    """Deterministic well-separated class means on the coordinate axes."""
    anchors = np.zeros((cfg.n_classes, cfg.dim), dtype=np.float64)
    for k in range(cfg.n_classes):
        j = k % cfg.dim
        sign = 1.0 if (k // cfg.dim) % 2 == 0 else -1.0
        anchors[k, j] = sign * cfg.class_sep * (1 + k // (2 * cfg.dim))
    return anchors


def _expit(t: np.ndarray) -> np.ndarray:
    out = np.empty_like(t, dtype=np.float64)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    e = np.exp(t[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def _softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _as_rows(x, dim: int) -> tuple:
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.shape[1] != dim:
        raise ConfigurationError(f"query dimension {x.shape[1]} != scenario dim {dim}")
    return x, single


def _mixture_logpdf(x: np.ndarray, means: np.ndarray, weights: np.ndarray, std: float) -> np.ndarray:
    d = means.shape[1]
    d2 = ((x[:, None, :] - means[None, :, :]) ** 2).sum(axis=2)
    logcomp = (
        -0.5 * d2 / (std * std)
        - d * math.log(std * math.sqrt(2.0 * math.pi))
        + np.log(weights)[None, :]
    )
    best = logcomp.max(axis=1, keepdims=True)
    return (best[:, 0] + np.log(np.exp(logcomp - best).sum(axis=1)))


class Oracle:
    """Exact quantities of the generating process.

    ``conditional`` is the true P(Y | X = x); ``ratio`` the exact density
    ratio p_test / p_cal (covariate-shift scenarios only), and
    ``sample_features`` draws fresh feature vectors from either marginal.
    """

    def __init__(self, cfg: ScenarioConfig):
        self._cfg = cfg
        self._anchors = class_anchors(cfg)

    @property
    def scenario(self) -> ScenarioConfig:
        return self._cfg

    def conditional(self, x):
        cfg = self._cfg
        rows, single = _as_rows(x, cfg.dim)
        d2 = ((rows[:, None, :] - self._anchors[None, :, :]) ** 2).sum(axis=2)
        if cfg.kind == "patient-shift":
            var = cfg.x_std**2 + cfg.effect_scale**2
            eta = _softmax(-d2 / (2.0 * var))
        else:
            sy = cfg.label_noise * (1.0 + cfg.hetero_gain * _expit(rows[:, 0]))
            eta = _softmax(-d2 / (2.0 * sy[:, None] ** 2))
        return eta[0] if single else eta

    def _marginal_params(self, domain: str) -> tuple:
        cfg = self._cfg
        means = self._anchors
        weights = np.full(cfg.n_classes, 1.0 / cfg.n_classes)
        if domain == "test" and cfg.kind == "covariate-shift":
            means = means + cfg.shift_vector()[None, :]
            if cfg.test_weights is not None:
                weights = np.asarray(cfg.test_weights, dtype=np.float64)
        return means, weights

    def ratio(self, x):
        cfg = self._cfg
        if cfg.kind != "covariate-shift":
            raise UnsupportedScenarioError(
                f"exact density ratio is only defined for covariate-shift, not {cfg.kind!r}"
            )
        rows, single = _as_rows(x, cfg.dim)
        m_cal, w_cal = self._marginal_params("calibration")
        m_test, w_test = self._marginal_params("test")
        log_ratio = _mixture_logpdf(rows, m_test, w_test, cfg.x_std) - _mixture_logpdf(
            rows, m_cal, w_cal, cfg.x_std
        )
        out = np.exp(log_ratio)
        return float(out[0]) if single else out

    def sample_features(self, n: int, seed: int, domain: str = "calibration") -> np.ndarray:
        cfg = self._cfg
        if cfg.kind == "patient-shift":
            raise UnsupportedScenarioError("patient-shift has no closed-form feature marginal")
        if domain not in ("calibration", "test"):
            raise ValueError(f"domain must be 'calibration' or 'test', got {domain!r}")
        means, weights = self._marginal_params(domain)
        rng = np.random.default_rng([cfg.seed, int(seed)])
        comp = rng.choice(cfg.n_classes, size=n, p=weights)
        return means[comp] + rng.normal(size=(n, cfg.dim)) * cfg.x_std


def split_counts(n_total: int) -> tuple:
    """60/10/15/15 split sizes by the largest-remainder rule (exact)."""
    base = [int(n_total * f) for f in SPLIT_FRACTIONS]
    remainders = [n_total * f - b for f, b in zip(SPLIT_FRACTIONS, base)]
    leftover = n_total - sum(base)
    order = sorted(range(4), key=lambda i: (-remainders[i], i))
    for i in order[:leftover]:
        base[i] += 1
    return tuple(base)


def _sample_labels(eta: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    cum = np.cumsum(eta, axis=1)
    u = rng.random(eta.shape[0])
    y = (cum < u[:, None]).sum(axis=1)
    return np.minimum(y, eta.shape[1] - 1).astype(np.int64)


def _partition_patients(n_patients: int) -> list:
    counts = split_counts(n_patients)
    pools = []
    start = 0
    for c in counts:
        pools.append(np.arange(start, start + c))
        start += c
    return pools


def generate(scenario: ScenarioConfig, n_total: int, seed: int):
    """Draw a full dataset plus its oracle.

    Deterministic in (scenario.seed, seed). Records carry split tags; the
    patient-shift kind also carries disjoint patient ids per split.
    """
    if n_total < 100:
        raise ConfigurationError(f"n_total must be at least 100, got {n_total}")
    oracle = Oracle(scenario)
    rng = np.random.default_rng([scenario.seed, int(seed)])
    counts = split_counts(n_total)
    records = []
    next_id = 0

    if scenario.kind in ("iid", "covariate-shift"):
        for split, n in zip(SPLITS, counts):
            domain = "test" if split == "test" else "calibration"
            means, weights = oracle._marginal_params(domain)
            comp = rng.choice(scenario.n_classes, size=n, p=weights)
            x = means[comp] + rng.normal(size=(n, scenario.dim)) * scenario.x_std
            y = _sample_labels(oracle.conditional(x), rng)
            for i in range(n):
                records.append(
                    Record(
                        id=f"s{next_id:07d}",
                        features=x[i],
                        label=int(y[i]),
                        split=split,
                    )
                )
                next_id += 1
    else:
        pools = _partition_patients(scenario.n_patients)
        if any(len(p) == 0 for p in pools):
            raise ConfigurationError("every split needs at least one patient")
        effects = rng.normal(size=(scenario.n_patients, scenario.dim)) * scenario.effect_scale
        test_mean = (
            scenario.effect_scale
            * scenario.cohort_shift
            * np.ones(scenario.dim)
            / math.sqrt(scenario.dim)
        )
        effects[pools[3]] += test_mean[None, :]
        anchors = class_anchors(scenario)
        for split, n, pool in zip(SPLITS, counts, pools):
            y = rng.integers(scenario.n_classes, size=n)
            pidx = pool[rng.integers(len(pool), size=n)]
            x = anchors[y] + effects[pidx] + rng.normal(size=(n, scenario.dim)) * scenario.x_std
            for i in range(n):
                records.append(
                    Record(
                        id=f"s{next_id:07d}",
                        features=x[i],
                        patient_id=f"p{int(pidx[i]):05d}",
                        label=int(y[i]),
                        split=split,
                    )
                )
                next_id += 1

    return Dataset(records=tuple(records), n_classes=scenario.n_classes), oracle


def oracle_conditional(oracle: Oracle, x):
    """Exact P(Y | X = x) of the generating process."""
    return oracle.conditional(x)
