"""
Deterministic synthetic datasets addressed as ``synthetic:<name>``.

They need no files, so tests, gradcheck and the bench's synthetic row can run anywhere.
"""

from __future__ import annotations
from typing import Callable, Dict

import numpy as np

from ..exceptions import DatasetNotFound, InvalidArgument
from ..types.enums import TaskType
from .dataset import Dataset


def piecewise_target(x: np.ndarray) -> np.ndarray:
    """y = x for x < 0, y = -2x + 1 otherwise."""
    return np.where(x < 0, x, -2.0 * x + 1.0)


def piecewise_linear_1d(num_rows: int = 400, seed: int = 0, low: float = -1.0,
                        high: float = 1.0) -> Dataset:
    """One feature uniform in [low, high) with the two-piece target of ``piecewise_target``."""
    if num_rows < 1:
        raise InvalidArgument(f"num_rows must be >= 1, got {num_rows}")
    rng = np.random.default_rng(seed)
    x = rng.uniform(low, high, size=(num_rows, 1))
    return Dataset(x, piecewise_target(x), TaskType.REGRESSION, ('x',),
                   name='synthetic:piecewise')


def separable_blobs(num_rows: int = 200, seed: int = 0, margin: float = 0.5) -> Dataset:
    """Two classes in 2-D on opposite sides of a random line, at least ``margin`` away from it."""
    if num_rows < 2:
        raise InvalidArgument(f"num_rows must be >= 2, got {num_rows}")
    rng = np.random.default_rng(seed)
    angle = rng.uniform(0.0, 2.0 * np.pi)
    normal = np.array([np.cos(angle), np.sin(angle)])
    tangent = np.array([-normal[1], normal[0]])
    labels = np.arange(num_rows) % 2
    offsets = margin + rng.exponential(1.0, size=num_rows)
    along = rng.uniform(-3.0, 3.0, size=num_rows)
    signs = np.where(labels == 1, 1.0, -1.0)
    X = np.outer(signs * offsets, normal) + np.outer(along, tangent)
    return Dataset(X, labels, TaskType.CLASSIFICATION, ('x0', 'x1'), ('0', '1'),
                   name='synthetic:blobs')


GENERATORS: Dict[str, Callable[..., Dataset]] = {
    'synthetic:piecewise': piecewise_linear_1d,
    'synthetic:blobs': separable_blobs,
}


def generate(name: str, seed: int = 0) -> Dataset:
    """Build a registered generator by name; unknown names raise ``DatasetNotFound``."""
    try:
        generator = GENERATORS[name]
    except KeyError:
        raise DatasetNotFound(f"Unknown synthetic dataset '{name}'", name=name) from None
    return generator(seed=seed)
