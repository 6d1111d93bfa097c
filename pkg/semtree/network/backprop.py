"""
Reverse-mode gradients for the fixed network.

Classification: ReLU + MaxPool + softmax cross-entropy, exact everywhere.
Regression: squared error through the argmax one-hot, whose backward is the single
straight-through substitution in the graph; regressor gradients stay exact.
"""

from __future__ import annotations
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import torch
import torch.nn.functional as F

from ..exceptions import InvalidArgument, NumericFailure
from ..optim.overparam import fold_chain
from ..types.enums import TaskType
from .semnet import DTYPE, ForwardRecord, SemNet


@dataclass(frozen=True)
class Gradients:
    d_weights: torch.Tensor
    d_biases: torch.Tensor
    d_regressors: Optional[torch.Tensor] = None
    d_overparam: Optional[Tuple[torch.Tensor, ...]] = None

    def decision_matrix(self) -> torch.Tensor:
        return torch.cat([self.d_weights, self.d_biases.unsqueeze(1)], dim=1)

    def tensors(self) -> List[torch.Tensor]:
        """Gradients in trainable-parameter order (chain factors or the decision matrix, then regressors)."""
        out = list(self.d_overparam) if self.d_overparam is not None else [self.decision_matrix()]
        if self.d_regressors is not None:
            out.append(self.d_regressors)
        return out

    def norm(self) -> float:
        norms = torch.stack([torch.linalg.vector_norm(g) for g in self.tensors()])
        return float(torch.linalg.vector_norm(norms))

    def is_finite(self) -> bool:
        return all(bool(torch.isfinite(g).all()) for g in self.tensors())

    def scaled(self, factor: float) -> Gradients:
        return Gradients(
            d_weights=self.d_weights * factor,
            d_biases=self.d_biases * factor,
            d_regressors=None if self.d_regressors is None else self.d_regressors * factor,
            d_overparam=None if self.d_overparam is None else tuple(g * factor for g in self.d_overparam),
        )


@dataclass(frozen=True)
class LossReport:
    data_loss: float
    penalty: float = 0.0
    batch_size: int = 0

    @property
    def loss(self) -> float:
        return self.data_loss + self.penalty


def loss_cross_entropy(scores: Union[torch.Tensor, np.ndarray, Sequence[float]], label: int) -> float:
    """Softmax cross-entropy of one score vector (log-sum-exp with max subtraction)."""
    C = torch.as_tensor(scores, dtype=DTYPE)
    if not 0 <= label < C.shape[0]:
        raise InvalidArgument(f"Label {label} outside [0, {C.shape[0]})")
    return float(F.cross_entropy(C.unsqueeze(0), torch.tensor([label])))


def _check_finite(values: torch.Tensor, batch_index: Optional[int]) -> None:
    finite = torch.isfinite(values.reshape(values.shape[0], -1)).all(dim=1)
    if not bool(finite.all()):
        row = int((~finite).nonzero()[0, 0])
        raise NumericFailure("Non-finite activation in forward pass", batch_index=batch_index, row=row)


def _collect(net: SemNet, record: ForwardRecord, loss: torch.Tensor) -> Gradients:
    n = net.num_features
    inputs = [record.W]
    if net.has_overparams:
        inputs.extend(net.chain)
    if net.regressors is not None:
        inputs.append(net.regressors)
    grads = torch.autograd.grad(loss, inputs)

    d_matrix = grads[0]
    cursor = 1
    d_overparam = None
    if net.has_overparams:
        d_overparam = tuple(g.detach() for g in grads[cursor:cursor + len(net.chain)])
        cursor += len(net.chain)
    d_regressors = grads[cursor].detach() if net.regressors is not None else None
    return Gradients(
        d_weights=d_matrix[:, :n].detach(),
        d_biases=d_matrix[:, n].detach(),
        d_regressors=d_regressors,
        d_overparam=d_overparam,
    )


def classification_loss(record: ForwardRecord, labels: torch.Tensor) -> torch.Tensor:
    return F.cross_entropy(record.C, labels)


def regression_loss(record: ForwardRecord, targets: torch.Tensor) -> torch.Tensor:
    return F.mse_loss(record.out, targets)


def _as_targets(net: SemNet, targets) -> torch.Tensor:
    Y = torch.as_tensor(targets, dtype=DTYPE)
    if Y.dim() == 1:
        Y = Y.unsqueeze(1)
    if Y.shape[1] != net.output_dim:
        raise InvalidArgument(f"Targets have {Y.shape[1]} columns, network outputs {net.output_dim}")
    return Y


def backward_classification(
    net: SemNet,
    X,
    labels,
    l1_lambda: float = 0.0,
    batch_index: Optional[int] = None,
) -> Tuple[LossReport, Gradients]:
    if net.task is not TaskType.CLASSIFICATION:
        raise InvalidArgument("backward_classification needs a classification network")
    y = torch.as_tensor(labels, dtype=torch.int64).reshape(-1)
    if y.shape[0] == 0:
        raise InvalidArgument("Batch is empty")
    record = net(X)
    _check_finite(record.L, batch_index)
    loss = classification_loss(record, y)
    grads = _collect(net, record, loss)
    report = LossReport(data_loss=float(loss.detach()), batch_size=int(y.shape[0]))
    return _with_l1(report, grads, net, l1_lambda)


def backward_regression(
    net: SemNet,
    X,
    targets,
    l1_lambda: float = 0.0,
    batch_index: Optional[int] = None,
) -> Tuple[LossReport, Gradients]:
    if net.task is not TaskType.REGRESSION:
        raise InvalidArgument("backward_regression needs a regression network")
    Y = _as_targets(net, targets)
    if Y.shape[0] == 0:
        raise InvalidArgument("Batch is empty")
    record = net(X)
    _check_finite(record.L, batch_index)
    _check_finite(record.out, batch_index)
    loss = regression_loss(record, Y)
    grads = _collect(net, record, loss)
    report = LossReport(data_loss=float(loss.detach()), batch_size=int(Y.shape[0]))
    return _with_l1(report, grads, net, l1_lambda)


def l1_penalty(net: SemNet, l1_lambda: float) -> float:
    with torch.no_grad():
        weights = net.decision_matrix()[:, :net.num_features]
        return float(l1_lambda * weights.abs().sum())


def add_l1(grads: Gradients, net: SemNet, l1_lambda: float) -> Gradients:
    """Add lambda * sign(w) to the decision-weight gradients only (sign(0) = 0)."""
    if l1_lambda < 0:
        raise InvalidArgument(f"L1 lambda must be >= 0, got {l1_lambda}")
    if l1_lambda == 0:
        return grads
    n = net.num_features
    with torch.no_grad():
        sub = l1_lambda * torch.sign(net.decision_matrix()[:, :n])
    d_overparam = grads.d_overparam
    if d_overparam is not None:
        folded = fold_chain(net.chain)
        upstream = torch.zeros_like(folded)
        upstream[:, :n] = sub
        extra = torch.autograd.grad(folded, list(net.chain), grad_outputs=upstream)
        d_overparam = tuple(g + e.detach() for g, e in zip(d_overparam, extra))
    return replace(grads, d_weights=grads.d_weights + sub, d_overparam=d_overparam)


def _with_l1(report: LossReport, grads: Gradients, net: SemNet,
             l1_lambda: float) -> Tuple[LossReport, Gradients]:
    if l1_lambda < 0:
        raise InvalidArgument(f"L1 lambda must be >= 0, got {l1_lambda}")
    if l1_lambda == 0:
        return report, grads
    report = replace(report, penalty=l1_penalty(net, l1_lambda))
    return report, add_l1(grads, net, l1_lambda)
