from __future__ import annotations
from functools import lru_cache
from typing import Any, Dict, NamedTuple, Optional, Sequence, Tuple

from .core.tree import build_balanced, graft_classifier
from .data.registry import data_dir, get_entry
from .exceptions import ConfigError
from .network.semnet import SemNet, encode
from .types.descriptors import OPTIM_KEYS, OptimConfig, RunConfig
from .types.enums import DataFormat, TaskType

# tuned optimizer rows, one value per OPTIM_KEYS entry
_TUNED_ROWS = {
    'segment': (50, 'adam', 0.01, 'NA', 'linear', 0.95, 128, 'NA', 'NA', '[1530]'),
    'satimages': (200, 'rmsprop', 0.01, 0.2, 'linear', 0.98, 128, 5e-5, 0.01, '[4032]'),
    'pendigits': (100, 'rmsprop', 0.01, 0.0, 'linear', 0.98, 128, 1e-5, 0.01, '[16320]'),
    'letter': (400, 'rmsprop', 0.01, 0.0, 'linear', 0.95, 128, 5e-6, 0.01, '[6128x6138]'),
    'protein': (40, 'rmsprop', 0.01, 0.0, 'linear', 0.98, 128, 1e-3, 0.01, '[180x180]'),
    'connect4': (100, 'rmsprop', 0.01, 0.0, 'linear', 0.95, 128, 1e-4, 0.01, '[8160]'),
    'mnist': (100, 'sgd', 0.4, 0.9, 'linear', 0.95, 128, 'NA', 'NA', 'NA'),
    'sensit': (250, 'rmsprop', 0.01, 0.0, 'linear', 0.95, 128, 1e-4, 0.01, '[6138]'),
    'acute-inflammations-1': (20, 'adam', 0.8, 'NA', 'linear', 0.99, 128, 'NA', 'NA', 'NA'),
    'acute-inflammations-2': (30, 'adam', 0.7, 'NA', 'linear', 0.98, 128, 'NA', 'NA', 'NA'),
    'balance-scale': (20, 'adam', 0.8, 'NA', 'linear', 0.98, 128, 'NA', 'NA', 'NA'),
    'breast-cancer': (50, 'adam', 0.05, 'NA', 'linear', 0.90, 256, 1e-2, 'NA', 'NA'),
    'blood-transfusion': (50, 'adam', 0.7, 'NA', 'linear', 0.95, 128, 'NA', 'NA', 'NA'),
    'banknote': (40, 'adam', 0.5, 'NA', 'linear', 0.98, 128, 'NA', 'NA', 'NA'),
    'ailerons': (100, 'adam', 0.1, 'NA', 'linear', 0.90, 32, 5e-4, 0.01, 'NA'),
    'abalone': (50, 'adam', 0.005, 'NA', 'linear', 0.95, 32, 5e-4, 'NA', '[248]'),
    'comp-activ': (100, 'adam', 0.02, 'NA', 'linear', 0.90, 128, 1e-4, 'NA', '[186]'),
    'ctslice': (50, 'adam', 0.001, 'NA', 'linear', 0.90, 128, 'NA', 'NA', '[992x496]'),
    'yearpred': (40, 'adam', 0.001, 'NA', 'linear', 0.90, 128, 1e-4, 'NA', '[378]'),
    'microsoft': (30, 'adam', 0.002, 'NA', 'linear', 0.90, 256, 'NA', 'NA', 'NA'),
}

# tree heights of the best reported rows for the bundled datasets
PRESET_HEIGHTS = {
    'balance-scale': 2,
    'banknote': 3,
    'blood-transfusion': 2,
    'acute-inflammations-1': 2,
    'acute-inflammations-2': 2,
    'breast-cancer': 2,
    'abalone': 5,
}


class PathDataset(NamedTuple):
    filename: str
    test_filename: Optional[str]
    task: TaskType
    format: DataFormat = DataFormat.LIBSVM
    splits: Tuple[float, float, float] = (0.8, 0.2, 0.0)
    target: Tuple[str, ...] = ()


# larger corpora, never vendored; files are looked up under data_dir()
PATH_DATASETS = {
    'protein': PathDataset('protein', 'protein.t', TaskType.CLASSIFICATION),
    'satimages': PathDataset('satimage.scale', 'satimage.scale.t', TaskType.CLASSIFICATION),
    'segment': PathDataset('segment.scale', None, TaskType.CLASSIFICATION,
                           splits=(0.64, 0.16, 0.2)),
    'pendigits': PathDataset('pendigits', 'pendigits.t', TaskType.CLASSIFICATION),
    'connect4': PathDataset('connect-4', None, TaskType.CLASSIFICATION, splits=(0.64, 0.16, 0.2)),
    'mnist': PathDataset('mnist', 'mnist.t', TaskType.CLASSIFICATION),
    'sensit': PathDataset('combined_scale', 'combined_scale.t', TaskType.CLASSIFICATION),
    'letter': PathDataset('letter.scale', 'letter.scale.t', TaskType.CLASSIFICATION),
    'comp-activ': PathDataset('comp-activ.csv', None, TaskType.REGRESSION, DataFormat.CSV,
                              (0.5, 0.1, 0.4), ('usr',)),
    'ailerons': PathDataset('ailerons.csv', 'ailerons.test.csv', TaskType.REGRESSION,
                            DataFormat.CSV, target=('goal',)),
    'ctslice': PathDataset('slice_localization_data.csv', None, TaskType.REGRESSION,
                           DataFormat.CSV, (0.5, 0.1, 0.4), ('reference',)),
    'yearpred': PathDataset('YearPredictionMSD', 'YearPredictionMSD.t', TaskType.REGRESSION),
    'microsoft': PathDataset('mslr-web10k.train', 'mslr-web10k.test', TaskType.REGRESSION),
}


def tuned_row(name: str) -> Dict[str, Any]:
    try:
        row = _TUNED_ROWS[name.lower()]
    except KeyError:
        raise ConfigError(f"No tuned optimizer row for '{name}'", key='dataset') from None
    return dict(zip(OPTIM_KEYS, row))


@lru_cache(maxsize=None)
def preset_optim(name: str) -> OptimConfig:
    return OptimConfig.from_dict(tuned_row(name))


def preset_config(name: str, seeds: Sequence[int] = tuple(range(10)),
                  height: Optional[int] = None) -> RunConfig:
    """RunConfig for a bundled dataset with its tuned optimizer row and split fractions."""
    entry = get_entry(name)
    if entry is None:
        raise ConfigError(f"'{name}' is not a bundled dataset", key='dataset')
    return RunConfig(
        dataset=entry.name,
        task=entry.task,
        height=height if height is not None else PRESET_HEIGHTS[entry.name],
        format=entry.format,
        seeds=tuple(seeds),
        splits=entry.splits,
        optim=preset_optim(entry.name),
    )


def path_config(name: str, seeds: Sequence[int] = tuple(range(10)), height: int = 3) -> RunConfig:
    """RunConfig for one of ``PATH_DATASETS``: files under ``data_dir()``, tuned optimizer row."""
    try:
        spec = PATH_DATASETS[name.lower()]
    except KeyError:
        raise ConfigError(f"'{name}' is not a known path dataset", key='dataset') from None
    root = data_dir()
    return RunConfig(
        dataset=str(root / spec.filename),
        task=spec.task,
        height=height,
        format=spec.format,
        seeds=tuple(seeds),
        splits=spec.splits,
        target=spec.target,
        test_dataset=str(root / spec.test_filename) if spec.test_filename else None,
        optim=preset_optim(name.lower()),
    )


def create_classifier(height: int, num_classes: int, num_features: int,
                      overparams: Sequence[int] = (), seed: Optional[int] = None) -> SemNet:
    return encode(graft_classifier(height, num_classes), num_features, TaskType.CLASSIFICATION,
                  overparams=overparams, seed=seed)


def create_regressor(height: int, num_features: int, output_dim: int = 1,
                     overparams: Sequence[int] = (), seed: Optional[int] = None) -> SemNet:
    return encode(build_balanced(height), num_features, TaskType.REGRESSION, output_dim,
                  overparams, seed)


def create_network_for(config: RunConfig, num_features: int, num_classes: int = 2,
                       output_dim: int = 1, seed: Optional[int] = None) -> SemNet:
    if config.task is TaskType.CLASSIFICATION:
        return create_classifier(config.height, num_classes, num_features,
                                 config.optim.overparams, seed)
    return create_regressor(config.height, num_features, output_dim, config.optim.overparams, seed)
