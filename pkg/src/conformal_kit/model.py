"""Multinomial logistic regression trained by full-batch gradient descent.

Stands in for the paper-scale neural classifier: it produces the class
probabilities the calibrators consume and exposes the standardized input
features as its embedding. Full-batch descent keeps every downstream
number bit-reproducible for a given seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateLabelsError, ShapeError

STD_FLOOR = 1e-8


@dataclass(frozen=True)
class LinearClassifier:
    weights: np.ndarray  # (C, d)
    bias: np.ndarray  # (C,)
    feature_mean: np.ndarray  # (d,)
    feature_std: np.ndarray  # (d,)
    final_loss: float = float("nan")
    loss_history: tuple = field(default=(), repr=False)

    def __post_init__(self):
        for name in ("weights", "bias", "feature_mean", "feature_std"):
            a = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        if np.any(self.feature_std < STD_FLOOR):
            raise ValueError(f"feature_std entries must be >= {STD_FLOOR}")

    @property
    def n_classes(self) -> int:
        return self.weights.shape[0]

    @property
    def dim(self) -> int:
        return self.weights.shape[1]

    def to_json(self) -> dict:
        return {
            "weights": self.weights.tolist(),
            "bias": self.bias.tolist(),
            "feature_mean": self.feature_mean.tolist(),
            "feature_std": self.feature_std.tolist(),
            "final_loss": self.final_loss,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "LinearClassifier":
        return cls(
            weights=np.asarray(obj["weights"], dtype=np.float64),
            bias=np.asarray(obj["bias"], dtype=np.float64),
            feature_mean=np.asarray(obj["feature_mean"], dtype=np.float64),
            feature_std=np.asarray(obj["feature_std"], dtype=np.float64),
            final_loss=float(obj.get("final_loss", float("nan"))),
        )


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax with max subtraction."""
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def cross_entropy_loss(
    weights: np.ndarray,
    bias: np.ndarray,
    z: np.ndarray,
    onehot: np.ndarray,
    l2: float,
) -> float:
    """Mean cross-entropy plus 0.5 * l2 * ||W||^2 (bias unpenalized)."""
    logits = z @ weights.T + bias
    logz = logits - logits.max(axis=1, keepdims=True)
    log_probs = logz - np.log(np.exp(logz).sum(axis=1, keepdims=True))
    nll = -float((onehot * log_probs).sum()) / z.shape[0]
    return nll + 0.5 * l2 * float((weights**2).sum())


def loss_gradient(
    weights: np.ndarray,
    bias: np.ndarray,
    z: np.ndarray,
    onehot: np.ndarray,
    l2: float,
):
    """Analytic gradient of :func:`cross_entropy_loss` wrt weights and bias."""
    n = z.shape[0]
    probs = softmax(z @ weights.T + bias)
    delta = (probs - onehot) / n
    return delta.T @ z + l2 * weights, delta.sum(axis=0)


def train(
    records,
    epochs: int = 300,
    learning_rate: float = 0.5,
    l2: float = 1e-4,
    seed: int = 0,
) -> LinearClassifier:
    """Fit the classifier on labeled records.

    Weights start at zero (the objective is convex, so the seed only
    enters provenance). Loss after the final step is recorded along with
    the per-epoch history.
    """
    records = list(records)
    if not records or any(r.label is None for r in records):
        raise DegenerateLabelsError("training requires labeled records")
    x = np.asarray([r.features for r in records], dtype=np.float64)
    y = np.asarray([r.label for r in records], dtype=np.int64)
    classes = np.unique(y)
    if classes.shape[0] < 2:
        raise DegenerateLabelsError("training requires at least two classes present")
    n_classes = int(classes.max()) + 1

    mean = x.mean(axis=0)
    std = np.maximum(x.std(axis=0), STD_FLOOR)
    z = (x - mean) / std
    onehot = np.zeros((x.shape[0], n_classes), dtype=np.float64)
    onehot[np.arange(x.shape[0]), y] = 1.0

    weights = np.zeros((n_classes, x.shape[1]), dtype=np.float64)
    bias = np.zeros(n_classes, dtype=np.float64)
    history = []
    for _ in range(epochs):
        grad_w, grad_b = loss_gradient(weights, bias, z, onehot, l2)
        weights = weights - learning_rate * grad_w
        bias = bias - learning_rate * grad_b
        history.append(cross_entropy_loss(weights, bias, z, onehot, l2))

    return LinearClassifier(
        weights=weights,
        bias=bias,
        feature_mean=mean,
        feature_std=std,
        final_loss=history[-1] if history else float("nan"),
        loss_history=tuple(history),
    )


def _as_batch(classifier: LinearClassifier, features) -> tuple:
    x = np.asarray(features, dtype=np.float64)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != classifier.dim:
        raise ShapeError(f"features must have {classifier.dim} dimensions, got {x.shape}")
    return x, single


def embed(classifier: LinearClassifier, features):
    """Standardized features: the linear model's penultimate representation."""
    x, single = _as_batch(classifier, features)
    z = (x - classifier.feature_mean) / classifier.feature_std
    return z[0] if single else z


def predict_proba(classifier: LinearClassifier, features):
    """Class probabilities, a valid simplex vector per input row."""
    x, single = _as_batch(classifier, features)
    z = (x - classifier.feature_mean) / classifier.feature_std
    probs = softmax(z @ classifier.weights.T + classifier.bias)
    return probs[0] if single else probs
