from __future__ import annotations
from typing import Protocol, runtime_checkable

import numpy as np


@runtime_checkable
class IHardPredictor(Protocol):
    """Anything that routes a batch of inputs to leaf indices (trees and networks alike)."""

    @property
    def num_features(self) -> int:
        ...

    def predict_leaves(self, X: np.ndarray) -> np.ndarray:
        ...
