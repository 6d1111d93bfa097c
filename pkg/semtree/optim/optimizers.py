"""
Update rules and learning-rate schedules for the decision network.

The optimizer owns the trainable tensors (single writer); gradients are handed in
from the backward pass rather than accumulated by autograd on the parameters.
"""

from __future__ import annotations
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Dict, List, Optional, Sequence, Tuple, Union

import torch
from torch import nn
from torch.optim.lr_scheduler import LambdaLR

from ..exceptions import InvalidArgument
from ..types.descriptors import OptimConfig
from ..types.enums import OptimizerType, SchedulerType

if TYPE_CHECKING:
    from ..network.backprop import Gradients


GradientsLike = Union['Gradients', Sequence[torch.Tensor]]


def lr_factor(config: OptimConfig, epoch: int, total_epochs: Optional[int] = None) -> float:
    """Multiplier on the base learning rate at the start of ``epoch``."""
    if epoch < 0:
        raise InvalidArgument(f"epoch must be >= 0, got {epoch}")
    if config.scheduler_type is SchedulerType.COSINE:
        total = total_epochs or config.epochs
        return 0.5 * (1.0 + math.cos(math.pi * min(epoch, total) / total))
    return config.scheduler_decay ** epoch


def decay_lr(config: OptimConfig, epoch: int, total_epochs: Optional[int] = None,
             lr0: Optional[float] = None) -> float:
    base = config.lr if lr0 is None else lr0
    return base * lr_factor(config, epoch, total_epochs)


def _global_norm(tensors: Sequence[torch.Tensor]) -> float:
    if not tensors:
        return 0.0
    norms = torch.stack([torch.linalg.vector_norm(t.detach()) for t in tensors])
    return float(torch.linalg.vector_norm(norms))


def clip_tensors(tensors: Sequence[torch.Tensor], max_norm: float) -> List[torch.Tensor]:
    if not max_norm > 0:
        raise InvalidArgument(f"max_norm must be > 0, got {max_norm}")
    norm = _global_norm(tensors)
    if norm <= max_norm:
        return list(tensors)
    scale = max_norm / norm
    return [t * scale for t in tensors]


def clip_grads(grads: 'Gradients', max_norm: float) -> 'Gradients':
    """Scale every gradient so the global L2 norm is at most ``max_norm``."""
    if not max_norm > 0:
        raise InvalidArgument(f"max_norm must be > 0, got {max_norm}")
    norm = grads.norm()
    if norm <= max_norm:
        return grads
    return grads.scaled(max_norm / norm)


@dataclass(frozen=True)
class OptimState:
    step: int
    lr: float
    epoch: int
    buffer_shapes: Dict[str, Tuple[Tuple[int, ...], ...]] = field(default_factory=dict)


def _build_optimizer(params: List[nn.Parameter], config: OptimConfig) -> torch.optim.Optimizer:
    if config.optimizer is OptimizerType.SGD:
        return torch.optim.SGD(params, lr=config.lr, momentum=config.momentum)
    if config.optimizer is OptimizerType.ADAM:
        return torch.optim.Adam(params, lr=config.lr, betas=config.ADAM_BETAS, eps=config.EPS)
    if config.optimizer is OptimizerType.RMSPROP:
        return torch.optim.RMSprop(
            params, lr=config.lr, alpha=config.RMSPROP_ALPHA, eps=config.EPS,
            momentum=config.momentum,
        )
    raise InvalidArgument(f"Unsupported optimizer: {config.optimizer}")


class ParameterOptimizer:
    """torch optimizer plus per-epoch schedule over an explicit parameter list."""

    def __init__(self, params: Sequence[nn.Parameter], config: OptimConfig,
                 total_epochs: Optional[int] = None):
        self._params = list(params)
        if not self._params:
            raise InvalidArgument("ParameterOptimizer needs at least one parameter")
        self._config = config
        self._total_epochs = total_epochs or config.epochs
        self._optimizer = _build_optimizer(self._params, config)
        self._scheduler = LambdaLR(
            self._optimizer, lambda epoch: lr_factor(config, epoch, self._total_epochs)
        )
        self._step = 0
        self._epoch = 0

    @property
    def config(self) -> OptimConfig:
        return self._config

    @property
    def lr(self) -> float:
        return float(self._optimizer.param_groups[0]['lr'])

    @property
    def step_count(self) -> int:
        return self._step

    def step(self, grads: GradientsLike) -> float:
        """Apply one update; returns the gradient norm after clipping."""
        tensors = list(grads.tensors()) if hasattr(grads, 'tensors') else list(grads)
        if len(tensors) != len(self._params):
            raise InvalidArgument(
                f"Got {len(tensors)} gradients for {len(self._params)} parameters"
            )
        for param, grad in zip(self._params, tensors):
            if tuple(grad.shape) != tuple(param.shape):
                raise InvalidArgument(
                    f"Gradient shape {tuple(grad.shape)} does not match parameter {tuple(param.shape)}"
                )
        if self._config.grad_clip is not None:
            tensors = clip_tensors(tensors, self._config.grad_clip)
        for param, grad in zip(self._params, tensors):
            param.grad = grad.detach().to(param.dtype).clone()
        self._optimizer.step()
        self._optimizer.zero_grad(set_to_none=True)
        self._step += 1
        return _global_norm(tensors)

    def end_epoch(self) -> float:
        self._scheduler.step()
        self._epoch += 1
        return self.lr

    def state(self) -> OptimState:
        shapes: Dict[str, Tuple[Tuple[int, ...], ...]] = {}
        for param in self._params:
            for name, buffer in self._optimizer.state.get(param, {}).items():
                if isinstance(buffer, torch.Tensor) and buffer.dim() > 0:
                    shapes.setdefault(name, ())
                    shapes[name] = shapes[name] + (tuple(buffer.shape),)
        return OptimState(step=self._step, lr=self.lr, epoch=self._epoch, buffer_shapes=shapes)


def step(optimizer: ParameterOptimizer, grads: GradientsLike) -> float:
    return optimizer.step(grads)
