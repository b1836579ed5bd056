"""Domain types, nonconformity scoring, and prediction-set construction.

The only score implemented is the hinge score ``1 - p(label | x)``; it is
kept behind :func:`nonconformity_score` so an alternative could be added
without touching any calibrator. Scores are plain floats in [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import (
    InvalidLabelError,
    InvalidProbabilitiesError,
    RecordValidationError,
    ShapeError,
)

SIMPLEX_ATOL = 1e-9

SPLITS = ("train", "valid", "calibration", "test")


def _freeze(a: Optional[np.ndarray]) -> Optional[np.ndarray]:
    if a is None:
        return None
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 1:
        raise ShapeError(f"expected a 1-D vector, got shape {a.shape}")
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


def check_probs(probs: np.ndarray) -> np.ndarray:
    """Validate a probability vector: non-negative, sums to 1 within 1e-9."""
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 1 or probs.shape[0] < 1:
        raise InvalidProbabilitiesError("probs must be a non-empty 1-D vector")
    if not np.all(np.isfinite(probs)):
        raise InvalidProbabilitiesError("probs must be finite")
    if np.any(probs < 0):
        raise InvalidProbabilitiesError("probs must be non-negative")
    if abs(float(probs.sum()) - 1.0) > SIMPLEX_ATOL:
        raise InvalidProbabilitiesError(
            f"probs must sum to 1 within {SIMPLEX_ATOL}, got {float(probs.sum())!r}"
        )
    return probs


@dataclass(frozen=True, eq=False)
class Record:
    """One sample: raw covariates plus optional model outputs and label.

    Arrays are stored read-only so records can be shared freely across
    threads. ``probs`` must be a valid probability vector when present;
    ``label`` must index into it.
    """

    id: str
    features: np.ndarray
    patient_id: Optional[str] = None
    embedding: Optional[np.ndarray] = None
    probs: Optional[np.ndarray] = None
    label: Optional[int] = None
    split: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "features", _freeze(self.features))
        object.__setattr__(self, "embedding", _freeze(self.embedding))
        if self.probs is not None:
            probs = check_probs(self.probs)
            probs = np.ascontiguousarray(probs)
            probs.setflags(write=False)
            object.__setattr__(self, "probs", probs)
        if self.label is not None:
            label = int(self.label)
            if label < 0:
                raise InvalidLabelError(f"label must be non-negative, got {label}")
            if self.probs is not None and label >= self.probs.shape[0]:
                raise InvalidLabelError(
                    f"label {label} out of range for {self.probs.shape[0]} classes"
                )
            object.__setattr__(self, "label", label)
        if self.split is not None and self.split not in SPLITS:
            raise RecordValidationError(
                f"unknown split {self.split!r}", record_id=self.id, field="split"
            )

    def with_outputs(self, probs: np.ndarray, embedding: np.ndarray) -> "Record":
        """Copy of this record with model outputs attached."""
        return replace(self, probs=probs, embedding=embedding)


@dataclass(frozen=True)
class PredictionSet:
    """Set of candidate labels plus the threshold that produced it."""

    labels: frozenset
    threshold: float
    alpha: float

    def __post_init__(self):
        object.__setattr__(self, "labels", frozenset(int(y) for y in self.labels))

    @property
    def size(self) -> int:
        return len(self.labels)

    def __contains__(self, label: int) -> bool:
        return int(label) in self.labels

    def sorted_labels(self) -> list:
        return sorted(self.labels)


@dataclass(frozen=True)
class Dataset:
    """Ordered records with a class count and per-record split tags."""

    records: tuple
    n_classes: int

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        self.validate()

    def __len__(self) -> int:
        return len(self.records)

    def validate(self) -> None:
        dim = emb_dim = None
        seen_patient_splits: dict = {}
        for rec in self.records:
            if rec.features is not None:
                if dim is None:
                    dim = rec.features.shape[0]
                elif rec.features.shape[0] != dim:
                    raise RecordValidationError(
                        "inconsistent feature dimension", record_id=rec.id, field="features"
                    )
            if rec.embedding is not None:
                if emb_dim is None:
                    emb_dim = rec.embedding.shape[0]
                elif rec.embedding.shape[0] != emb_dim:
                    raise RecordValidationError(
                        "inconsistent embedding dimension", record_id=rec.id, field="embedding"
                    )
            if rec.probs is not None and rec.probs.shape[0] != self.n_classes:
                raise RecordValidationError(
                    f"probs length {rec.probs.shape[0]} != n_classes {self.n_classes}",
                    record_id=rec.id,
                    field="probs",
                )
            if rec.label is not None and rec.label >= self.n_classes:
                raise RecordValidationError(
                    f"label {rec.label} >= n_classes {self.n_classes}",
                    record_id=rec.id,
                    field="label",
                )
            if rec.patient_id is not None and rec.split is not None:
                prev = seen_patient_splits.setdefault(rec.patient_id, rec.split)
                if prev != rec.split:
                    raise RecordValidationError(
                        f"patient appears in splits {prev!r} and {rec.split!r}",
                        record_id=rec.id,
                        field="patient_id",
                    )

    def subset(self, split: str) -> list:
        if split not in SPLITS:
            raise ValueError(f"unknown split {split!r}")
        return [r for r in self.records if r.split == split]

    @property
    def split_tags(self) -> tuple:
        return tuple(r.split for r in self.records)


def nonconformity_score(probs, label: int) -> float:
    """Hinge nonconformity score ``1 - probs[label]``."""
    probs = check_probs(probs)
    label = int(label)
    if not 0 <= label < probs.shape[0]:
        raise InvalidLabelError(f"label {label} out of range for {probs.shape[0]} classes")
    return float(1.0 - probs[label])


def build_prediction_set(probs, threshold: float, alpha: float) -> PredictionSet:
    """Labels whose hinge score is at or below ``threshold``.

    ``threshold`` may be ``math.inf`` (the sentinel state), which admits
    every label. Ties at the threshold are included.
    """
    probs = check_probs(probs)
    threshold = float(threshold)
    if math.isnan(threshold):
        raise ValueError("threshold must not be NaN")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    labels = np.nonzero(1.0 - probs <= threshold)[0]
    return PredictionSet(labels=frozenset(int(y) for y in labels), threshold=threshold, alpha=alpha)
