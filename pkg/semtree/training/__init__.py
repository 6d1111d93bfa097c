from .trainer import (
    EpochRecord,
    RunLog,
    RunResult,
    build_network,
    evaluate,
    evaluate_splits,
    fit,
    is_better,
    prepare_dataset,
)
from .aggregate import AGGREGATE_NAME, AggregateResult, run_seed, run_seeds

__all__ = [
    "EpochRecord",
    "RunLog",
    "RunResult",
    "build_network",
    "evaluate",
    "evaluate_splits",
    "fit",
    "is_better",
    "prepare_dataset",
    "AGGREGATE_NAME",
    "AggregateResult",
    "run_seed",
    "run_seeds",
]
