"""
Multi-seed runs and their aggregate.

Each seed is an independent fit with its own split and initialization. A seed
that raises a ``SemTreeError`` is logged and recorded as failed, and the aggregate is
marked partial instead of aborting the run. Per-seed artifacts and ``aggregate.json``
embed the config hash so the bench can decide whether a stored result is reusable.
"""

from __future__ import annotations
import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np

from ..codecs.codec import CheckpointCodec
from ..exceptions import InvalidArgument, SemTreeError
from ..profiling.profiler import RunProfiler
from ..types.descriptors import RunConfig
from ..types.enums import TaskType
from .trainer import RunLog, RunResult, fit, metric_name, prepare_dataset

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def checkpoint_name(seed: int) -> str:
    return f"checkpoint_seed{seed}.json"


def tree_name(seed: int) -> str:
    return f"tree_seed{seed}.json"


def log_name(seed: int) -> str:
    return f"run_seed{seed}.jsonl"


AGGREGATE_NAME = 'aggregate.json'


def _clean(value: float) -> Optional[float]:
    return None if value is None or math.isnan(value) else float(value)


@dataclass
class AggregateResult:
    """Test metric per seed; mean and population std over the seeds that finished."""
    dataset: str
    task: TaskType
    height: int
    config_hash: str
    seeds: Tuple[int, ...]
    metrics: Dict[int, float] = field(default_factory=dict)
    failed_seeds: Tuple[int, ...] = ()

    @property
    def partial(self) -> bool:
        """True when at least one seed failed."""
        return bool(self.failed_seeds)

    @property
    def metric_name(self) -> str:
        return metric_name(self.task)

    def _values(self) -> np.ndarray:
        return np.array([self.metrics[s] for s in self.seeds if s in self.metrics], dtype=np.float64)

    @property
    def mean(self) -> float:
        values = self._values()
        return float(values.mean()) if values.size else float('nan')

    @property
    def std(self) -> float:
        values = self._values()
        return float(values.std(ddof=0)) if values.size else float('nan')

    def format(self, digits: Optional[int] = None) -> str:
        """``mean ± std``, one decimal for accuracy and three for RMSE by default."""
        if digits is None:
            digits = 1 if self.task is TaskType.CLASSIFICATION else 3
        return f"{self.mean:.{digits}f} ± {self.std:.{digits}f}"

    def to_dict(self) -> Dict[str, Any]:
        """JSON form; NaN metrics are written as null."""
        return {
            'dataset': self.dataset,
            'task': self.task.label,
            'height': self.height,
            'config_hash': self.config_hash,
            'metric': self.metric_name,
            'seeds': list(self.seeds),
            'per_seed': {str(s): _clean(self.metrics[s]) for s in self.seeds if s in self.metrics},
            'mean': _clean(self.mean),
            'std': _clean(self.std),
            'formatted': self.format(),
            'partial': self.partial,
            'failed_seeds': list(self.failed_seeds),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> AggregateResult:
        return cls(
            dataset=data['dataset'],
            task=TaskType.parse(data['task']),
            height=int(data['height']),
            config_hash=data['config_hash'],
            seeds=tuple(int(s) for s in data['seeds']),
            metrics={int(s): float('nan') if v is None else float(v)
                     for s, v in data.get('per_seed', {}).items()},
            failed_seeds=tuple(int(s) for s in data.get('failed_seeds', ())),
        )

    def write(self, path: PathLike) -> Path:
        """Write sorted, indented JSON, creating parent directories."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(), sort_keys=True, indent=2) + '\n', encoding='utf-8')
        return path


def run_seed(config: RunConfig, seed: int, out_dir: Optional[PathLike] = None,
             codec: Optional[CheckpointCodec] = None,
             profiler: Optional[RunProfiler] = None) -> RunResult:
    """One independent fit; with ``out_dir`` writes checkpoint, tree and run log."""
    dataset = prepare_dataset(config, seed)
    if out_dir is None:
        return fit(dataset, config, seed, profiler=profiler)

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    codec = codec or CheckpointCodec()
    config_hash = config.config_hash()
    with (out_dir / log_name(seed)).open('w', encoding='utf-8') as handle:
        result = fit(dataset, config, seed, RunLog(handle, config_hash, seed), profiler)
    codec.save_checkpoint(out_dir / checkpoint_name(seed), result.net, config_hash=config_hash,
                          seed=seed, standardizer=result.standardizer, epoch=result.best_epoch)
    codec.save_tree(out_dir / tree_name(seed), result.best_tree, config_hash=config_hash, seed=seed)
    return result


def run_seeds(
    config: RunConfig,
    seeds: Optional[Sequence[int]] = None,
    out_dir: Optional[PathLike] = None,
    max_workers: int = 1,
) -> AggregateResult:
    """Independent fits per seed; results keep seed order whatever the worker count."""
    seeds = tuple(int(s) for s in (config.seeds if seeds is None else seeds))
    if not seeds:
        raise InvalidArgument("run_seeds needs at least one seed")
    if max_workers < 1:
        raise InvalidArgument(f"max_workers must be >= 1, got {max_workers}")
    codec = CheckpointCodec()
    profiler = RunProfiler()

    def attempt(seed: int) -> Optional[RunResult]:
        try:
            return run_seed(config, seed, out_dir, codec, profiler)
        except SemTreeError as exc:
            logger.error("seed %d failed: %s", seed, exc)
            return None

    if max_workers == 1 or len(seeds) == 1:
        results = [attempt(s) for s in seeds]
    else:
        workers = min(max_workers, len(seeds), (os.cpu_count() or 1) + 4)
        with ThreadPoolExecutor(max_workers=workers, thread_name_prefix="seed") as pool:
            results = list(pool.map(attempt, seeds))

    aggregate = AggregateResult(
        dataset=config.dataset,
        task=config.task,
        height=config.height,
        config_hash=config.config_hash(),
        seeds=seeds,
        metrics={r.seed: r.test_metric for r in results if r is not None},
        failed_seeds=tuple(s for s, r in zip(seeds, results) if r is None),
    )
    logger.debug("run profile: %s", profiler.get_summary())
    if out_dir is not None:
        aggregate.write(Path(out_dir) / AGGREGATE_NAME)
    logger.info("%s height %d: %s %s over %d seeds%s", config.dataset, config.height,
                aggregate.metric_name, aggregate.format(), len(aggregate.metrics),
                " (partial)" if aggregate.partial else "")
    return aggregate
