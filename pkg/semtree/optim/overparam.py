"""
Over-parameterized decision matrices.

The K x (n+1) decision matrix can be stored as a chain of linear factors whose product
is the matrix. Training moves every factor; decoding folds the chain back into one
matrix, so the decoded tree and the network agree exactly.
"""

from __future__ import annotations
import math
from typing import Optional, Sequence

import torch
from torch import nn

from ..exceptions import InvalidArgument


def _fan_in_uniform(rows: int, cols: int, generator: Optional[torch.Generator]) -> torch.Tensor:
    """float64 (rows x cols) drawn uniform in [-1/sqrt(cols), 1/sqrt(cols)]."""
    bound = 1.0 / math.sqrt(cols)
    return torch.empty(rows, cols, dtype=torch.float64).uniform_(-bound, bound, generator=generator)


def make_overparam_chain(
    num_internal: int,
    num_features: int,
    widths: Sequence[int] = (),
    generator: Optional[torch.Generator] = None,
) -> nn.ParameterList:
    """
    Factors F_1 .. F_p (ordered input side first) whose product F_p ... F_1 is the
    K x (n+1) decision matrix. With no widths the chain is the single decision matrix,
    rows fan-in uniform and the bias column zero.
    """
    widths = tuple(int(w) for w in widths)
    if any(w <= 0 for w in widths):
        raise InvalidArgument(f"Over-parameterization widths must be positive, got {widths}")

    if not widths:
        matrix = _fan_in_uniform(num_internal, num_features + 1, generator)
        matrix[:, num_features] = 0.0
        return nn.ParameterList([nn.Parameter(matrix)])

    dims = (num_features + 1,) + widths + (num_internal,)
    return nn.ParameterList(
        nn.Parameter(_fan_in_uniform(dims[i + 1], dims[i], generator))
        for i in range(len(dims) - 1)
    )


def fold_chain(chain: Sequence[torch.Tensor]) -> torch.Tensor:
    """Multiply the factors out, left-multiplying in order: F_p @ (... @ (F_2 @ F_1))."""
    if len(chain) == 0:
        raise InvalidArgument("Cannot fold an empty chain")
    product = chain[0]
    for factor in list(chain)[1:]:
        product = factor @ product
    return product
