"""
Straight-through estimator for the regression head.

The forward pass replaces the leaf scores with a one-hot of the selected leaf; the
backward pass hands the incoming gradient to the scores unchanged. Every substitution is
counted in ``ste_counter`` so tests and the gradcheck report can tell exact gradient
paths from by-definition ones.
"""

from __future__ import annotations
from threading import RLock
from typing import Dict, Tuple

import torch
import torch.nn.functional as F
from torch.autograd import Function


class STECounter:
    """Counts straight-through substitutions so callers can assert where they happen."""

    __slots__ = ('_lock', '_forward_calls', '_backward_calls')

    def __init__(self):
        self._lock = RLock()
        self._forward_calls = 0
        self._backward_calls = 0

    def record_forward(self) -> None:
        """Count one forward substitution."""
        with self._lock:
            self._forward_calls += 1

    def record_backward(self) -> None:
        """Count one backward pass through the estimator."""
        with self._lock:
            self._backward_calls += 1

    def reset(self) -> None:
        """Zero both counters."""
        with self._lock:
            self._forward_calls = 0
            self._backward_calls = 0

    def snapshot(self) -> Dict[str, int]:
        """Current counts as ``{'forward': ..., 'backward': ...}``."""
        with self._lock:
            return {'forward': self._forward_calls, 'backward': self._backward_calls}


ste_counter = STECounter()


class ArgmaxOneHotSTE(Function):
    """
    One-hot of the selected leaf in the forward pass; identity in the backward pass,
    so dLoss/dL_j := dLoss/dH_j.
    """

    @staticmethod
    def forward(ctx, scores: torch.Tensor, selected: torch.Tensor) -> torch.Tensor:
        ste_counter.record_forward()
        return F.one_hot(selected, num_classes=scores.shape[-1]).to(scores.dtype)

    @staticmethod
    def backward(ctx, grad_output: torch.Tensor) -> Tuple[torch.Tensor, None]:
        ste_counter.record_backward()
        return grad_output, None


def argmax_one_hot(scores: torch.Tensor, selected: torch.Tensor) -> torch.Tensor:
    """One-hot rows of ``selected`` (N,) over the columns of ``scores``, identity gradient."""
    return ArgmaxOneHotSTE.apply(scores, selected)
