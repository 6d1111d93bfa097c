"""
Trainable values carried by a decision tree: the decision hyperplanes and the leaf payloads.

Both containers hold read-only float64 numpy arrays. ``affine_columns`` is the one routine
used everywhere an affine map ``W x + b`` is evaluated, so that hard traversal and the
network compute bit-identical decision values.
"""

from __future__ import annotations
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..exceptions import InvalidArgument, InvalidState
from ..types.enums import TaskType


def _frozen(array: np.ndarray, dtype=np.float64) -> np.ndarray:
    out = np.array(array, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


def affine_columns(X: np.ndarray, W: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Return ``X @ W.T + b`` accumulated one feature column at a time (N x rows)."""
    acc = np.broadcast_to(b, (X.shape[0], b.shape[0])).astype(np.float64, copy=True)
    for k in range(X.shape[1]):
        acc = acc + X[:, k:k + 1] * W[:, k]
    return acc


@dataclass(frozen=True)
class DecisionParams:
    weights: np.ndarray
    biases: np.ndarray

    def __post_init__(self):
        weights = _frozen(self.weights)
        biases = _frozen(self.biases)
        if weights.ndim != 2:
            raise InvalidArgument(f"Decision weights must be a K x n matrix, got shape {weights.shape}")
        if biases.shape != (weights.shape[0],):
            raise InvalidArgument(
                f"Bias vector shape {biases.shape} does not match {weights.shape[0]} decision rows"
            )
        object.__setattr__(self, 'weights', weights)
        object.__setattr__(self, 'biases', biases)

    @classmethod
    def zeros(cls, num_internal: int, num_features: int) -> DecisionParams:
        return cls(np.zeros((num_internal, num_features)), np.zeros(num_internal))

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> DecisionParams:
        """Split a K x (n+1) matrix whose last column holds the biases."""
        matrix = np.asarray(matrix, dtype=np.float64)
        return cls(matrix[:, :-1], matrix[:, -1])

    @property
    def num_internal(self) -> int:
        return self.weights.shape[0]

    @property
    def num_features(self) -> int:
        return self.weights.shape[1]

    def as_matrix(self) -> np.ndarray:
        return np.hstack([self.weights, self.biases[:, None]])

    def decision_values(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.num_features:
            raise InvalidArgument(
                f"Input dimension {X.shape[-1] if X.ndim else 0} does not match n={self.num_features}"
            )
        return affine_columns(X, self.weights, self.biases)

    def destandardize(self, means: np.ndarray, stds: np.ndarray) -> DecisionParams:
        """Rewrite hyperplanes fitted on (x - mean) / std so they act on raw features."""
        means = np.asarray(means, dtype=np.float64)
        stds = np.asarray(stds, dtype=np.float64)
        weights = self.weights / stds
        return DecisionParams(weights, self.biases - weights @ means)


@dataclass(frozen=True)
class LeafPayloads:
    """Per-leaf outputs: class labels, or regressors ``theta`` (d x L x n) and ``alpha`` (d x L)."""
    task: TaskType
    classes: Optional[np.ndarray] = None
    theta: Optional[np.ndarray] = None
    alpha: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.task is TaskType.CLASSIFICATION:
            if self.classes is None:
                raise InvalidState("Classification payloads require class labels")
            classes = np.array(self.classes, dtype=np.int64, copy=True)
            classes.setflags(write=False)
            object.__setattr__(self, 'classes', classes)
            return
        if self.theta is None or self.alpha is None:
            raise InvalidState("Regression payloads require theta and alpha")
        theta = _frozen(self.theta)
        alpha = _frozen(self.alpha)
        if theta.ndim == 2:
            theta = _frozen(theta[None])
        if alpha.ndim == 1:
            alpha = _frozen(alpha[None])
        if theta.shape[:2] != alpha.shape:
            raise InvalidArgument(f"theta {theta.shape} and alpha {alpha.shape} disagree on leaves")
        object.__setattr__(self, 'theta', theta)
        object.__setattr__(self, 'alpha', alpha)

    @classmethod
    def for_classes(cls, labels: Sequence[Optional[int]]) -> LeafPayloads:
        if any(label is None for label in labels):
            raise InvalidState("Leaf class payload is unset")
        return cls(TaskType.CLASSIFICATION, classes=np.asarray(labels, dtype=np.int64))

    @classmethod
    def for_regressors(cls, theta: np.ndarray, alpha: np.ndarray) -> LeafPayloads:
        return cls(TaskType.REGRESSION, theta=theta, alpha=alpha)

    @property
    def num_leaves(self) -> int:
        if self.task is TaskType.CLASSIFICATION:
            return int(self.classes.shape[0])
        return int(self.theta.shape[1])

    @property
    def output_dim(self) -> int:
        return 1 if self.task is TaskType.CLASSIFICATION else int(self.theta.shape[0])

    @property
    def num_classes(self) -> int:
        return int(self.classes.max()) + 1 if self.task is TaskType.CLASSIFICATION else 0

    def leaf_outputs(self, leaves: np.ndarray, X: np.ndarray) -> np.ndarray:
        """Class labels (N,) or regression outputs (N x d) for leaf indices ``leaves``."""
        if self.task is TaskType.CLASSIFICATION:
            return self.classes[leaves]
        out = np.empty((X.shape[0], self.output_dim), dtype=np.float64)
        for d in range(self.output_dim):
            values = affine_columns(X, self.theta[d], self.alpha[d])
            out[:, d] = values[np.arange(X.shape[0]), leaves]
        return out

    def destandardize(self, means: np.ndarray, stds: np.ndarray,
                      target_means: Optional[np.ndarray] = None,
                      target_stds: Optional[np.ndarray] = None) -> LeafPayloads:
        if self.task is TaskType.CLASSIFICATION:
            return self
        means = np.asarray(means, dtype=np.float64)
        stds = np.asarray(stds, dtype=np.float64)
        y_mean = np.zeros(self.output_dim) if target_means is None else np.asarray(target_means, dtype=np.float64)
        y_std = np.ones(self.output_dim) if target_stds is None else np.asarray(target_stds, dtype=np.float64)
        theta = self.theta / stds
        alpha = self.alpha - theta @ means
        theta = theta * y_std[:, None, None]
        alpha = alpha * y_std[:, None] + y_mean[:, None]
        return LeafPayloads.for_regressors(theta, alpha)
