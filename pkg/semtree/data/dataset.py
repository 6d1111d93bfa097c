"""
In-memory datasets, deterministic splits and train-only standardization.
"""

from __future__ import annotations
import hashlib
import math
from dataclasses import dataclass, replace
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import DataError, InvalidArgument, InvalidState, SplitError
from ..types.enums import TaskType
from .loaders import RawTable

SPLIT_NAMES = ('train', 'val', 'test')
PROVIDER_VAL_FRACTION = 0.2


def _frozen(array: np.ndarray, dtype) -> np.ndarray:
    array = np.array(array, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class Splits:
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray

    def __post_init__(self):
        for name in SPLIT_NAMES:
            object.__setattr__(self, name, _frozen(getattr(self, name), np.int64))

    def get(self, name: str) -> np.ndarray:
        if name not in SPLIT_NAMES:
            raise InvalidArgument(f"Unknown split '{name}', expected one of {SPLIT_NAMES}")
        return getattr(self, name)

    def sizes(self) -> Tuple[int, int, int]:
        return len(self.train), len(self.val), len(self.test)

    def is_partition_of(self, num_rows: int) -> bool:
        combined = np.concatenate([self.train, self.val, self.test])
        return len(combined) == num_rows and np.array_equal(np.sort(combined), np.arange(num_rows))


@dataclass(frozen=True)
class Standardizer:
    """Per-column (mean, population std); zero std is clamped to 1."""
    means: np.ndarray
    stds: np.ndarray
    target_means: Optional[np.ndarray] = None
    target_stds: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, 'means', _frozen(self.means, np.float64))
        object.__setattr__(self, 'stds', _frozen(self.stds, np.float64))
        if self.target_means is not None:
            object.__setattr__(self, 'target_means', _frozen(np.atleast_1d(self.target_means), np.float64))
            object.__setattr__(self, 'target_stds', _frozen(np.atleast_1d(self.target_stds), np.float64))

    @staticmethod
    def _stats(values: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        means = values.mean(axis=0)
        stds = values.std(axis=0, ddof=0)
        stds = np.where(stds == 0.0, 1.0, stds)
        return means, stds

    @classmethod
    def fit(cls, X: np.ndarray, Y: Optional[np.ndarray] = None) -> Standardizer:
        X = np.asarray(X, dtype=np.float64)
        if X.shape[0] == 0:
            raise DataError("Cannot fit a standardizer on an empty split")
        means, stds = cls._stats(X)
        if Y is None:
            return cls(means, stds)
        target_means, target_stds = cls._stats(np.asarray(Y, dtype=np.float64).reshape(X.shape[0], -1))
        return cls(means, stds, target_means, target_stds)

    @property
    def has_targets(self) -> bool:
        return self.target_means is not None

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=np.float64) - self.means) / self.stds

    def transform_targets(self, Y: np.ndarray) -> np.ndarray:
        if not self.has_targets:
            return np.asarray(Y, dtype=np.float64)
        return (np.asarray(Y, dtype=np.float64) - self.target_means) / self.target_stds

    def inverse_targets(self, Y: np.ndarray) -> np.ndarray:
        if not self.has_targets:
            return np.asarray(Y, dtype=np.float64)
        return np.asarray(Y, dtype=np.float64) * self.target_stds + self.target_means

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            'means': self.means.tolist(),
            'stds': self.stds.tolist(),
            'ddof': 0,
        }
        if self.has_targets:
            data['target_mean'] = self.target_means.tolist()
            data['target_std'] = self.target_stds.tolist()
        return data

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> Standardizer:
        try:
            return cls(
                means=np.asarray(data['means'], dtype=np.float64),
                stds=np.asarray(data['stds'], dtype=np.float64),
                target_means=data.get('target_mean'),
                target_stds=data.get('target_std'),
            )
        except KeyError as exc:
            raise DataError(f"Standardizer dump is missing {exc}") from exc

    def digest(self) -> str:
        h = hashlib.blake2b(digest_size=8)
        for array in (self.means, self.stds, self.target_means, self.target_stds):
            if array is not None:
                h.update(array.tobytes())
        return h.hexdigest()


def encode_labels(values: Sequence[Any]) -> Tuple[np.ndarray, Tuple[str, ...]]:
    """Map raw labels to 0..c-1: numeric labels sort numerically, otherwise lexically."""
    raw = [str(v).strip() for v in values]
    distinct = sorted(set(raw))
    try:
        distinct = sorted(distinct, key=float)
    except ValueError:
        pass
    index = {label: i for i, label in enumerate(distinct)}
    return np.array([index[v] for v in raw], dtype=np.int64), tuple(distinct)


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    targets: np.ndarray
    task: TaskType
    feature_names: Tuple[str, ...] = ()
    class_names: Tuple[str, ...] = ()
    split: Optional[Splits] = None
    standardizer: Optional[Standardizer] = None
    name: str = ''

    def __post_init__(self):
        features = _frozen(self.features, np.float64)
        if features.ndim != 2:
            raise InvalidArgument(f"Features must be N x n, got shape {features.shape}")
        if self.task is TaskType.CLASSIFICATION:
            targets = _frozen(np.asarray(self.targets).reshape(-1), np.int64)
        else:
            targets = _frozen(np.asarray(self.targets, dtype=np.float64).reshape(features.shape[0], -1),
                              np.float64)
        if targets.shape[0] != features.shape[0]:
            raise InvalidArgument(f"{features.shape[0]} feature rows but {targets.shape[0]} targets")
        object.__setattr__(self, 'features', features)
        object.__setattr__(self, 'targets', targets)
        if not self.feature_names:
            object.__setattr__(self, 'feature_names',
                               tuple(f"x{i}" for i in range(features.shape[1])))

    @classmethod
    def from_table(cls, table: RawTable, task: TaskType, name: str = '') -> Dataset:
        X = table.feature_matrix()
        raw = table.target_values()
        if task is TaskType.CLASSIFICATION:
            if raw.shape[1] != 1:
                raise DataError("Classification needs exactly one target column")
            labels, class_names = encode_labels(raw[:, 0])
            return cls(X, labels, task, table.feature_columns, class_names, name=name)
        try:
            Y = raw.astype(np.float64)
        except ValueError as exc:
            raise DataError(f"Regression targets must be numeric: {exc}") from exc
        return cls(X, Y, task, table.feature_columns, name=name)

    @property
    def num_rows(self) -> int:
        return int(self.features.shape[0])

    @property
    def num_features(self) -> int:
        return int(self.features.shape[1])

    @property
    def num_classes(self) -> int:
        if self.task is not TaskType.CLASSIFICATION:
            return 0
        return max(len(self.class_names), int(self.targets.max()) + 1 if self.num_rows else 0)

    @property
    def output_dim(self) -> int:
        return 1 if self.task is TaskType.CLASSIFICATION else int(self.targets.shape[1])

    def subset(self, name: str) -> Tuple[np.ndarray, np.ndarray]:
        if self.split is None:
            raise InvalidState("Dataset has no split assigned")
        rows = self.split.get(name)
        return self.features[rows], self.targets[rows]

    def with_split(self, splits: Splits) -> Dataset:
        if not splits.is_partition_of(self.num_rows):
            raise SplitError("Split indices must be disjoint and cover every row")
        return replace(self, split=splits)

    def with_provider_split(self, train_idx: Sequence[int], test_idx: Sequence[int],
                            seed: int) -> Dataset:
        """Honor a provider train/test split; carve validation from train at 0.8/0.2."""
        train_idx = np.asarray(train_idx, dtype=np.int64)
        test_idx = np.asarray(test_idx, dtype=np.int64)
        fractions = (1.0 - PROVIDER_VAL_FRACTION, PROVIDER_VAL_FRACTION, 0.0)
        stratify = self.task is TaskType.CLASSIFICATION
        labels = self.targets[train_idx] if stratify else None
        train_local, val_local, _ = _split_indices(len(train_idx), fractions, seed, labels)
        return self.with_split(Splits(np.sort(train_idx[train_local]), np.sort(train_idx[val_local]),
                                      np.sort(test_idx)))


def _check_fractions(fractions: Sequence[float]) -> Tuple[float, float, float]:
    if len(fractions) != 3 or any(f < 0 for f in fractions):
        raise SplitError(f"Split fractions must be three non-negative numbers, got {fractions}")
    if not math.isclose(sum(fractions), 1.0, abs_tol=1e-9):
        raise SplitError(f"Split fractions must sum to 1, got {sum(fractions)}")
    return tuple(float(f) for f in fractions)


def _allocate(class_sizes: np.ndarray, fraction: float, total: int) -> np.ndarray:
    """Per-class counts floor(f * N_c), topped up by largest remainder to reach ``total``."""
    exact = fraction * class_sizes
    counts = np.floor(exact).astype(np.int64)
    remainders = exact - counts
    for c in np.argsort(-remainders, kind='stable'):
        if counts.sum() >= total:
            break
        counts[c] += 1
    return counts


def _split_indices(num_rows: int, fractions: Sequence[float], seed: int,
                   labels: Optional[np.ndarray] = None) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    _, f_val, f_test = _check_fractions(fractions)
    rng = np.random.default_rng(seed)
    n_val = math.floor(f_val * num_rows)
    n_test = math.floor(f_test * num_rows)

    if labels is None:
        order = rng.permutation(num_rows)
        return (np.sort(order[n_val + n_test:]), np.sort(order[:n_val]),
                np.sort(order[n_val:n_val + n_test]))

    classes = np.unique(labels)
    members = [np.flatnonzero(labels == c) for c in classes]
    sizes = np.array([len(m) for m in members], dtype=np.int64)
    needed = sum(1 for f in fractions if f > 0)
    for c, size in zip(classes, sizes):
        if size < needed:
            raise SplitError(
                f"Class {c} has {size} rows, fewer than the {needed} non-empty splits"
            )
    val_counts = _allocate(sizes, f_val, n_val)
    test_counts = _allocate(sizes, f_test, n_test)

    train: List[np.ndarray] = []
    val: List[np.ndarray] = []
    test: List[np.ndarray] = []
    for rows, nv, nt in zip(members, val_counts, test_counts):
        if nv + nt > len(rows):
            raise SplitError(f"Class with {len(rows)} rows cannot supply {nv} + {nt} held-out rows")
        shuffled = rows[rng.permutation(len(rows))]
        val.append(shuffled[:nv])
        test.append(shuffled[nv:nv + nt])
        train.append(shuffled[nv + nt:])
    return (np.sort(np.concatenate(train)), np.sort(np.concatenate(val)),
            np.sort(np.concatenate(test)))


def split(dataset: Dataset, fractions: Sequence[float] = (0.5, 0.25, 0.25), seed: int = 0,
          stratify: Optional[bool] = None) -> Dataset:
    """Seeded split; counts are floor(f * N) for val and test, the remainder goes to train."""
    if stratify is None:
        stratify = dataset.task is TaskType.CLASSIFICATION
    if stratify and dataset.task is not TaskType.CLASSIFICATION:
        raise SplitError("Stratified splits need class labels")
    labels = dataset.targets if stratify else None
    train, val, test = _split_indices(dataset.num_rows, fractions, seed, labels)
    return dataset.with_split(Splits(train, val, test))


def standardize(dataset: Dataset) -> Dataset:
    """Fit (mean, std) on the training split only and apply it to every row."""
    if dataset.split is None:
        raise InvalidState("standardize needs a split; call split() first")
    train = dataset.split.train
    if dataset.task is TaskType.REGRESSION:
        standardizer = Standardizer.fit(dataset.features[train], dataset.targets[train])
        targets = standardizer.transform_targets(dataset.targets)
    else:
        standardizer = Standardizer.fit(dataset.features[train])
        targets = dataset.targets
    return replace(dataset, features=standardizer.transform(dataset.features), targets=targets,
                   standardizer=standardizer)
