"""
Training loop with per-epoch validation on the decoded hard tree and best-validation
model selection.
"""

from __future__ import annotations
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Any, Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
import torch

from ..core.tree import DecisionTree
from ..data.dataset import Dataset, Standardizer, split, standardize
from ..data.encoding import BinaryEncoder, OneHotEncoder
from ..data.loaders import RawTable, load_csv, load_libsvm
from ..data.registry import is_synthetic, resolve
from ..data.synthetic import generate
from ..exceptions import DataError, InvalidArgument, NumericFailure
from ..factory import create_network_for
from ..network.backprop import backward_classification, backward_regression
from ..network.semnet import SemNet
from ..optim.optimizers import ParameterOptimizer
from ..profiling.profiler import RunProfiler
from ..types.descriptors import RunConfig
from ..types.enums import DataFormat, TaskType

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    lr: float
    train_loss: float
    val_metric: float

    def to_dict(self) -> Dict[str, Any]:
        return {'epoch': self.epoch, 'lr': self.lr, 'train_loss': self.train_loss,
                'val_metric': self.val_metric}


@dataclass
class RunResult:
    seed: int
    config_hash: str
    task: TaskType
    best_epoch: int
    best_tree: DecisionTree
    net: SemNet
    val_metric: float
    test_metric: float
    seconds: float = 0.0
    epochs: List[EpochRecord] = field(default_factory=list)
    standardizer: Optional[Standardizer] = None

    @property
    def metric_name(self) -> str:
        return metric_name(self.task)


def metric_name(task: TaskType) -> str:
    return 'accuracy' if task is TaskType.CLASSIFICATION else 'rmse'


def is_better(task: TaskType, candidate: float, best: Optional[float]) -> bool:
    """Strict improvement, so the earliest epoch keeps ties."""
    if best is None or math.isnan(best):
        return not math.isnan(candidate)
    if task is TaskType.CLASSIFICATION:
        return candidate > best
    return candidate < best


def evaluate(tree: DecisionTree, X: np.ndarray, y: np.ndarray,
             standardizer: Optional[Standardizer] = None) -> float:
    """Accuracy in percent, or RMSE in original target units."""
    if len(X) == 0:
        return float('nan')
    predictions = tree.predict(X)
    if tree.task is TaskType.CLASSIFICATION:
        return float(100.0 * np.mean(predictions == np.asarray(y).reshape(-1)))
    targets = np.asarray(y, dtype=np.float64).reshape(predictions.shape)
    if standardizer is not None:
        predictions = standardizer.inverse_targets(predictions)
        targets = standardizer.inverse_targets(targets)
    return float(np.sqrt(np.mean((predictions - targets) ** 2)))


class RunLog:
    """JSON-lines run log; every record carries the config hash and the seed."""

    def __init__(self, handle: Optional[IO[str]], config_hash: str, seed: int):
        self._handle = handle
        self._base = {'config_hash': config_hash, 'seed': seed}

    def write(self, record: Dict[str, Any]) -> None:
        if self._handle is None:
            return
        self._handle.write(json.dumps({**self._base, **record}, sort_keys=True) + '\n')


def _load_table(path: Path, config: RunConfig, fmt: DataFormat, target, categorical, drop) -> RawTable:
    regression = config.task is TaskType.REGRESSION
    if fmt is DataFormat.LIBSVM:
        return load_libsvm(path, numeric_target=regression)
    return load_csv(path, target, categorical, drop, numeric_target=regression)


def _fit_encoders(table: RawTable, binary, categorical) -> List[OneHotEncoder]:
    encoders: List[OneHotEncoder] = []
    if binary:
        encoders.append(BinaryEncoder(binary).fit(table))
        table = encoders[-1].transform(table)
    if categorical:
        encoders.append(OneHotEncoder(categorical).fit(table))
    return encoders


def _encode(table: RawTable, encoders: List[OneHotEncoder]) -> RawTable:
    for encoder in encoders:
        table = encoder.transform(table)
    return table


def prepare_dataset(config: RunConfig, seed: int) -> Dataset:
    """load -> binary/one-hot encode -> split (stratified for classification) -> standardize."""
    if is_synthetic(config.dataset):
        dataset = generate(config.dataset)
        if dataset.task is not config.task:
            raise DataError(f"{config.dataset} is a {dataset.task.label} dataset")
        return standardize(split(dataset, config.splits, seed))

    path, entry = resolve(config.dataset)
    target = config.target or (entry.target if entry else ())
    categorical = config.categorical or (entry.categorical if entry else ())
    binary = () if config.categorical or entry is None else entry.binary
    drop = entry.drop if entry else ()
    fmt = entry.format if entry else config.format
    table = _load_table(path, config, fmt, target, (*binary, *categorical), drop)

    encoders = _fit_encoders(table, binary, categorical)
    table = _encode(table, encoders)

    if config.test_dataset is None:
        dataset = Dataset.from_table(table, config.task, name=config.dataset)
        return standardize(split(dataset, config.splits, seed))

    test_path, _ = resolve(config.test_dataset)
    test_table = _encode(_load_table(test_path, config, fmt, target, (*binary, *categorical), drop),
                         encoders)
    if list(test_table.frame.columns) != list(table.frame.columns):
        if fmt is DataFormat.LIBSVM:
            test_table = test_table.with_frame(
                test_table.frame.reindex(columns=table.frame.columns, fill_value=0.0), ())
        else:
            raise DataError("Provider test file has different columns than the training file")
    combined = table.with_frame(pd.concat([table.frame, test_table.frame], ignore_index=True),
                                table.categorical)
    dataset = Dataset.from_table(combined, config.task, name=config.dataset)
    train_idx = np.arange(table.num_rows)
    test_idx = np.arange(table.num_rows, combined.num_rows)
    return standardize(dataset.with_provider_split(train_idx, test_idx, seed))


def build_network(dataset: Dataset, config: RunConfig, seed: int) -> SemNet:
    return create_network_for(config, dataset.num_features, max(dataset.num_classes, 2),
                              dataset.output_dim, seed)


def trainable_parameters(net: SemNet) -> List[torch.nn.Parameter]:
    params = list(net.chain)
    if net.regressors is not None:
        params.append(net.regressors)
    return params


def _selection_split(dataset: Dataset) -> str:
    if len(dataset.split.val) > 0:
        return 'val'
    logger.warning("Validation split is empty; selecting the checkpoint on the training split")
    return 'train'


def fit(
    dataset: Dataset,
    config: RunConfig,
    seed: int,
    log: Optional[Union[RunLog, IO[str]]] = None,
    profiler: Optional[RunProfiler] = None,
) -> RunResult:
    if dataset.split is None:
        raise InvalidArgument("fit needs a split dataset; see prepare_dataset")
    if dataset.task is not config.task:
        raise InvalidArgument(f"Dataset task {dataset.task.label} != config task {config.task.label}")
    profiler = profiler or RunProfiler(enable_memory_tracking=False)
    config_hash = config.config_hash()
    if not isinstance(log, RunLog):
        log = RunLog(log, config_hash, seed)
    log.write({'config': config.to_dict(), 'constants': config.optim.constants()})

    optim = config.optim
    net = build_network(dataset, config, seed)
    optimizer = ParameterOptimizer(trainable_parameters(net), optim)
    backward = backward_classification if dataset.task is TaskType.CLASSIFICATION else backward_regression

    X_train, y_train = dataset.subset('train')
    if len(X_train) == 0:
        raise DataError("Training split is empty")
    selection = _selection_split(dataset)
    X_sel, y_sel = dataset.subset(selection)
    rng = np.random.default_rng(seed)

    best_metric: Optional[float] = None
    best_epoch = 0
    best_tree = net.decode()
    best_state = {k: v.detach().clone() for k, v in net.state_dict().items()}
    epochs: List[EpochRecord] = []

    with profiler.profile_operation('fit', {'seed': seed}) as fit_profile:
        for epoch in range(optim.epochs):
            with profiler.profile_operation('epoch'):
                lr = optimizer.lr
                order = rng.permutation(len(X_train))
                total_loss = 0.0
                for batch_index, start in enumerate(range(0, len(order), optim.batch_size)):
                    rows = order[start:start + optim.batch_size]
                    try:
                        report, grads = backward(net, X_train[rows], y_train[rows],
                                                 optim.l1_lambda, batch_index)
                    except NumericFailure as exc:
                        raise NumericFailure(exc.message, epoch=epoch, batch_index=batch_index,
                                             row=exc.row) from exc
                    if not math.isfinite(report.loss) or not grads.is_finite():
                        raise NumericFailure("Non-finite loss or gradient", epoch=epoch,
                                             batch_index=batch_index)
                    optimizer.step(grads)
                    total_loss += report.loss * len(rows)

                tree = net.decode()
                val_metric = evaluate(tree, X_sel, y_sel, dataset.standardizer)
                record = EpochRecord(epoch, lr, total_loss / len(order), val_metric)
                epochs.append(record)
                log.write(record.to_dict())
                logger.debug("seed %d epoch %d: lr=%.4g loss=%.6f %s=%.4f", seed, epoch, lr,
                             record.train_loss, selection, val_metric)
                if is_better(dataset.task, val_metric, best_metric):
                    best_metric, best_epoch, best_tree = val_metric, epoch, tree
                    best_state = {k: v.detach().clone() for k, v in net.state_dict().items()}
                optimizer.end_epoch()

    net.load_state_dict(best_state)
    X_test, y_test = dataset.subset('test')
    test_metric = evaluate(best_tree, X_test, y_test, dataset.standardizer)
    seconds = fit_profile.seconds
    log.write({'test_metric': test_metric, 'best_epoch': best_epoch, 'seconds': seconds})
    logger.info("seed %d: best epoch %d, %s %s=%.4f (%.2fs)", seed, best_epoch,
                metric_name(dataset.task), 'test', test_metric, seconds)
    return RunResult(
        seed=seed,
        config_hash=config_hash,
        task=dataset.task,
        best_epoch=best_epoch,
        best_tree=best_tree,
        net=net,
        val_metric=float('nan') if best_metric is None else best_metric,
        test_metric=test_metric,
        seconds=seconds,
        epochs=epochs,
        standardizer=dataset.standardizer,
    )


def evaluate_splits(tree: DecisionTree, dataset: Dataset) -> Tuple[float, float]:
    X_val, y_val = dataset.subset('val')
    X_test, y_test = dataset.subset('test')
    return (evaluate(tree, X_val, y_val, dataset.standardizer),
            evaluate(tree, X_test, y_test, dataset.standardizer))
