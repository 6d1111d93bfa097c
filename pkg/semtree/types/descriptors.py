from __future__ import annotations
import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Mapping, Optional, Sequence, Tuple

from ..exceptions import ConfigError, InvalidArgument
from .aliases import ConfigHash, NodeID
from .enums import DataFormat, DecisionSign, OptimizerType, SchedulerType, TaskType


@dataclass(frozen=True)
class InternalNode:
    node_id: NodeID
    left: NodeID
    right: NodeID

    def __post_init__(self):
        if self.left == self.right:
            raise InvalidArgument(
                f"Internal node {self.node_id} has identical children ({self.left})",
                node_id=self.node_id,
            )

    def child(self, sign: DecisionSign) -> NodeID:
        return self.right if sign is DecisionSign.RIGHT else self.left


@dataclass(frozen=True)
class Leaf:
    """A tree leaf; ``payload`` is a class label or a regressor id, unset until assigned."""
    node_id: NodeID
    payload: Optional[int] = None

    def with_payload(self, payload: Optional[int]) -> Leaf:
        return replace(self, payload=payload)


@dataclass(frozen=True)
class SignedDecision:
    node_id: NodeID
    sign: DecisionSign

    def __str__(self) -> str:
        return f"{self.sign.symbol}D{self.node_id}"


SignedDecisionSet = Tuple[SignedDecision, ...]


OPTIM_KEYS = (
    'epoch', 'optimizer', 'lr', 'mtm', 'scheduler_type', 'scheduler_decay',
    'batch_size', 'lambda', 'grad_clip', 'overparams',
)

RUN_KEYS = (
    'dataset', 'format', 'task', 'height', 'seeds', 'splits', 'target',
    'categorical', 'test_dataset', 'optim',
)


def _is_unset(value: Any) -> bool:
    return value is None or (isinstance(value, str) and value.strip().upper() in ('NA', 'NONE', ''))


def _parse_overparams(value: Any) -> Tuple[int, ...]:
    if _is_unset(value):
        return ()
    if isinstance(value, str):
        # chains are written as "[6128x6138]"
        text = value.strip().strip('[]')
        if not text:
            return ()
        parts = text.replace(',', 'x').split('x')
        return tuple(int(p) for p in parts if p.strip())
    if isinstance(value, (int, float)):
        return (int(value),)
    return tuple(int(v) for v in value)


@dataclass(frozen=True)
class OptimConfig:
    epochs: int = 40
    optimizer: OptimizerType = OptimizerType.ADAM
    lr: float = 0.01
    momentum: float = 0.0
    scheduler_type: SchedulerType = SchedulerType.LINEAR
    scheduler_decay: float = 1.0
    batch_size: int = 128
    l1_lambda: float = 0.0
    grad_clip: Optional[float] = None
    overparams: Tuple[int, ...] = ()

    ADAM_BETAS = (0.9, 0.999)
    RMSPROP_ALPHA = 0.99
    EPS = 1e-8

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigError(f"epoch must be >= 1, got {self.epochs}", key='epoch')
        if not self.lr > 0:
            raise ConfigError(f"lr must be > 0, got {self.lr}", key='lr')
        if not 0.0 <= self.momentum < 1.0:
            raise ConfigError(f"mtm must be in [0, 1), got {self.momentum}", key='mtm')
        if not 0.0 < self.scheduler_decay <= 1.0:
            raise ConfigError(
                f"scheduler_decay must be in (0, 1], got {self.scheduler_decay}",
                key='scheduler_decay',
            )
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}", key='batch_size')
        if self.l1_lambda < 0:
            raise ConfigError(f"lambda must be >= 0, got {self.l1_lambda}", key='lambda')
        if self.grad_clip is not None and not self.grad_clip > 0:
            raise ConfigError(f"grad_clip must be > 0, got {self.grad_clip}", key='grad_clip')
        if any(width <= 0 for width in self.overparams):
            raise ConfigError(f"overparams widths must be positive: {self.overparams}", key='overparams')

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> OptimConfig:
        for key in data:
            if key not in OPTIM_KEYS:
                raise ConfigError(f"Unknown optimizer config key '{key}'", key=key)
        defaults = cls()
        try:
            return cls(
                epochs=int(data.get('epoch', defaults.epochs)),
                optimizer=OptimizerType.parse(data.get('optimizer', defaults.optimizer.label)),
                lr=float(data.get('lr', defaults.lr)),
                momentum=0.0 if _is_unset(data.get('mtm')) else float(data['mtm']),
                scheduler_type=SchedulerType.parse(
                    data.get('scheduler_type', defaults.scheduler_type.label)
                ),
                scheduler_decay=(
                    1.0 if _is_unset(data.get('scheduler_decay')) else float(data['scheduler_decay'])
                ),
                batch_size=int(data.get('batch_size', defaults.batch_size)),
                l1_lambda=0.0 if _is_unset(data.get('lambda')) else float(data['lambda']),
                grad_clip=None if _is_unset(data.get('grad_clip')) else float(data['grad_clip']),
                overparams=_parse_overparams(data.get('overparams')),
            )
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"Invalid optimizer config: {exc}") from exc

    def to_dict(self) -> Dict[str, Any]:
        return {
            'epoch': self.epochs,
            'optimizer': self.optimizer.label,
            'lr': self.lr,
            'mtm': self.momentum,
            'scheduler_type': self.scheduler_type.label,
            'scheduler_decay': self.scheduler_decay,
            'batch_size': self.batch_size,
            'lambda': self.l1_lambda,
            'grad_clip': self.grad_clip,
            'overparams': list(self.overparams),
        }

    def constants(self) -> Dict[str, Any]:
        return {
            'adam_betas': list(self.ADAM_BETAS),
            'rmsprop_alpha': self.RMSPROP_ALPHA,
            'eps': self.EPS,
        }


@dataclass(frozen=True)
class RunConfig:
    dataset: str
    task: TaskType = TaskType.CLASSIFICATION
    height: int = 3
    format: DataFormat = DataFormat.CSV
    seeds: Tuple[int, ...] = (0,)
    splits: Tuple[float, float, float] = (0.5, 0.25, 0.25)
    target: Tuple[str, ...] = ()
    categorical: Tuple[str, ...] = ()
    test_dataset: Optional[str] = None
    optim: OptimConfig = field(default_factory=OptimConfig)

    def __post_init__(self):
        if self.height < 1:
            raise ConfigError(f"height must be >= 1, got {self.height}", key='height')
        if not self.seeds:
            raise ConfigError("At least one seed is required", key='seeds')
        if len(self.splits) != 3 or any(f < 0 for f in self.splits):
            raise ConfigError(f"splits must be three non-negative fractions: {self.splits}", key='splits')
        if not math.isclose(sum(self.splits), 1.0, abs_tol=1e-9):
            raise ConfigError(f"splits must sum to 1, got {sum(self.splits)}", key='splits')

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> RunConfig:
        for key in data:
            if key not in RUN_KEYS:
                raise ConfigError(f"Unknown config key '{key}'", key=key)
        if 'dataset' not in data:
            raise ConfigError("Config requires 'dataset'", key='dataset')
        target = data.get('target') or ()
        seeds = data.get('seeds', (0,))
        try:
            return cls(
                dataset=str(data['dataset']),
                task=TaskType.parse(data.get('task', 'classification')),
                height=int(data.get('height', 3)),
                format=DataFormat.parse(data.get('format', 'csv')),
                seeds=tuple(int(s) for s in ([seeds] if isinstance(seeds, int) else seeds)),
                splits=tuple(float(f) for f in data.get('splits', (0.5, 0.25, 0.25))),
                target=(target,) if isinstance(target, str) else tuple(target),
                categorical=tuple(data.get('categorical') or ()),
                test_dataset=data.get('test_dataset'),
                optim=OptimConfig.from_dict(data.get('optim') or {}),
            )
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"Invalid run config: {exc}") from exc

    def to_dict(self) -> Dict[str, Any]:
        return {
            'dataset': self.dataset,
            'format': self.format.label,
            'task': self.task.label,
            'height': self.height,
            'seeds': list(self.seeds),
            'splits': list(self.splits),
            'target': list(self.target),
            'categorical': list(self.categorical),
            'test_dataset': self.test_dataset,
            'optim': self.optim.to_dict(),
        }

    def config_hash(self) -> ConfigHash:
        """Seed-independent hash; seeds are recorded next to it in every artifact."""
        payload = self.to_dict()
        payload.pop('seeds')
        canonical = json.dumps(payload, sort_keys=True, separators=(',', ':'))
        return ConfigHash(hashlib.blake2b(canonical.encode('utf-8'), digest_size=8).hexdigest())

    def with_seeds(self, seeds: Sequence[int]) -> RunConfig:
        return replace(self, seeds=tuple(int(s) for s in seeds))
