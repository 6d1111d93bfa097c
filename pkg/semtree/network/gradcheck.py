from __future__ import annotations
import logging
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np
import torch

from ..core.tree import build_balanced, graft_classifier
from ..exceptions import InvalidArgument
from ..types.enums import TaskType
from .backprop import (
    backward_classification,
    backward_regression,
    classification_loss,
    regression_loss,
)
from .semnet import DTYPE, SemNet, encode

logger = logging.getLogger(__name__)

DEFAULT_STEP = 1e-6
DEFAULT_TOLERANCE = 1e-4
_DENOMINATOR_FLOOR = 1e-2
ERROR_KIND = 'relative, denominator max(|analytic|, |numeric|, 1e-2)'
_STE_PATHS = ('decision_weights', 'decision_biases')


@dataclass(frozen=True)
class GradcheckReport:
    """
    ``max_rel_error`` floors the denominator at 1e-2, so entries whose gradients are both
    below the floor are effectively held to an absolute bound. ``max_unfloored_rel_error``
    and ``max_abs_error`` are reported next to it.
    """
    max_rel_error: float
    num_checked: int
    by_definition: Tuple[str, ...] = ()
    max_unfloored_rel_error: float = 0.0
    max_abs_error: float = 0.0


@dataclass
class GradcheckSummary:
    task: TaskType
    trials: int
    max_rel_error: float = 0.0
    num_checked: int = 0
    by_definition: Tuple[str, ...] = ()
    max_unfloored_rel_error: float = 0.0
    max_abs_error: float = 0.0
    errors: List[float] = field(default_factory=list)

    def passed(self, tolerance: float = DEFAULT_TOLERANCE) -> bool:
        return self.max_rel_error < tolerance

    def to_dict(self) -> dict:
        return {
            'task': self.task.label,
            'trials': self.trials,
            'max_rel_error': self.max_rel_error,
            'error_kind': ERROR_KIND,
            'max_unfloored_rel_error': self.max_unfloored_rel_error,
            'max_abs_error': self.max_abs_error,
            'num_checked': self.num_checked,
            'by_definition': list(self.by_definition),
        }


def _loss_value(net: SemNet, X: torch.Tensor, targets: torch.Tensor) -> float:
    with torch.no_grad():
        record = net(X)
        if net.task is TaskType.CLASSIFICATION:
            return float(classification_loss(record, targets))
        return float(regression_loss(record, targets))


def finite_difference_check(net: SemNet, X, targets, h: float = DEFAULT_STEP) -> GradcheckReport:
    """
    Central differences against the analytic gradient for every parameter on an exact path.
    Relative error uses max(|analytic|, |numeric|, 1e-2) as denominator.
    """
    if h <= 0:
        raise InvalidArgument(f"Finite-difference step must be > 0, got {h}")
    X = torch.as_tensor(X, dtype=DTYPE)
    if net.task is TaskType.CLASSIFICATION:
        targets = torch.as_tensor(targets, dtype=torch.int64).reshape(-1)
        _, grads = backward_classification(net, X, targets)
        params = list(net.chain)
        analytic = list(grads.d_overparam) if grads.d_overparam is not None else [grads.decision_matrix()]
        by_definition: Tuple[str, ...] = ()
    else:
        targets = torch.as_tensor(targets, dtype=DTYPE)
        if targets.dim() == 1:
            targets = targets.unsqueeze(1)
        _, grads = backward_regression(net, X, targets)
        params = [net.regressors]
        analytic = [grads.d_regressors]
        by_definition = _STE_PATHS

    worst = worst_unfloored = worst_abs = 0.0
    checked = 0
    for param, grad in zip(params, analytic):
        flat = param.data.view(-1)
        expected = grad.reshape(-1)
        for k in range(flat.numel()):
            original = float(flat[k])
            flat[k] = original + h
            upper = _loss_value(net, X, targets)
            flat[k] = original - h
            lower = _loss_value(net, X, targets)
            flat[k] = original
            numeric = (upper - lower) / (2.0 * h)
            exact = float(expected[k])
            diff = abs(exact - numeric)
            scale = max(abs(exact), abs(numeric))
            worst = max(worst, diff / max(scale, _DENOMINATOR_FLOOR))
            if scale > 0:
                worst_unfloored = max(worst_unfloored, diff / scale)
            worst_abs = max(worst_abs, diff)
            checked += 1
    return GradcheckReport(max_rel_error=worst, num_checked=checked, by_definition=by_definition,
                           max_unfloored_rel_error=worst_unfloored, max_abs_error=worst_abs)


def _random_case(task: TaskType, rng: np.random.Generator, trial_seed: int,
                 batch_size: int) -> Tuple[SemNet, np.ndarray, np.ndarray]:
    height = int(rng.integers(1, 4))
    n = int(rng.choice([1, 2, 4]))
    X = rng.standard_normal((batch_size, n))
    if task is TaskType.CLASSIFICATION:
        num_classes = int(rng.integers(2, 2 ** height + 1))
        net = encode(graft_classifier(height, num_classes), n, task, seed=trial_seed)
        targets = rng.integers(0, num_classes, size=batch_size)
    else:
        net = encode(build_balanced(height), n, task, seed=trial_seed)
        targets = rng.standard_normal(batch_size)
    return net, X, targets


def run_gradcheck(task: TaskType = TaskType.CLASSIFICATION, trials: int = 50, seed: int = 0,
                  batch_size: int = 8, h: float = DEFAULT_STEP) -> GradcheckSummary:
    if trials < 1:
        raise InvalidArgument(f"trials must be >= 1, got {trials}")
    task = TaskType(task)
    rng = np.random.default_rng(seed)
    summary = GradcheckSummary(task=task, trials=trials)
    for trial in range(trials):
        net, X, targets = _random_case(task, rng, seed * 1000 + trial, batch_size)
        report = finite_difference_check(net, X, targets, h)
        summary.errors.append(report.max_rel_error)
        summary.num_checked += report.num_checked
        summary.max_rel_error = max(summary.max_rel_error, report.max_rel_error)
        summary.max_unfloored_rel_error = max(summary.max_unfloored_rel_error,
                                              report.max_unfloored_rel_error)
        summary.max_abs_error = max(summary.max_abs_error, report.max_abs_error)
        summary.by_definition = report.by_definition
        logger.debug("gradcheck trial %d: %s max rel error %.3e over %d entries",
                     trial, task.label, report.max_rel_error, report.num_checked)
    logger.info("gradcheck %s: %d trials, max relative error %.3e",
                task.label, trials, summary.max_rel_error)
    return summary
