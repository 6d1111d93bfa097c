from .overparam import make_overparam_chain, fold_chain
from .optimizers import (
    OptimState,
    ParameterOptimizer,
    clip_grads,
    clip_tensors,
    decay_lr,
    lr_factor,
    step,
)

__all__ = [
    "make_overparam_chain",
    "fold_chain",
    "OptimState",
    "ParameterOptimizer",
    "clip_grads",
    "clip_tensors",
    "decay_lr",
    "lr_factor",
    "step",
]
