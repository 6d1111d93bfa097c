"""
Registry of small tabular datasets.

Files are looked up in ``SEMTREE_DATA_DIR`` when it is set, then in the ``datasets``
directory shipped inside the package; nothing here touches the network. A recorded
SHA-256 is verified on every resolve. Larger corpora are given by path in the run config
instead.
"""

from __future__ import annotations
import hashlib
import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterator, Optional, Tuple

from ..exceptions import ChecksumMismatch, DatasetNotFound
from ..types.enums import DataFormat, TaskType

logger = logging.getLogger(__name__)

DATA_DIR_ENV = 'SEMTREE_DATA_DIR'
BUNDLED_DATA_DIR = Path(__file__).resolve().parent.parent / 'datasets'
SYNTHETIC_PREFIX = 'synthetic:'

_ACUTE_FLAGS = ('nausea', 'lumbar_pain', 'urine_pushing', 'micturition_pains', 'burning')


@dataclass(frozen=True)
class DatasetEntry:
    name: str
    filename: str
    task: TaskType
    target: Tuple[str, ...]
    format: DataFormat = DataFormat.CSV
    categorical: Tuple[str, ...] = ()
    binary: Tuple[str, ...] = ()
    drop: Tuple[str, ...] = ()
    splits: Tuple[float, float, float] = (0.5, 0.25, 0.25)
    sha256: Optional[str] = None
    source: str = ''

    @property
    def bundled(self) -> bool:
        return (BUNDLED_DATA_DIR / self.filename).is_file()


REGISTRY: Dict[str, DatasetEntry] = {
    entry.name: entry
    for entry in (
        DatasetEntry('balance-scale', 'balance-scale.csv', TaskType.CLASSIFICATION, ('class',),
                     source='UCI Balance Scale, header row added'),
        DatasetEntry('banknote', 'banknote.csv', TaskType.CLASSIFICATION, ('class',),
                     source='UCI Banknote Authentication, header row added'),
        DatasetEntry('acute-inflammations-1', 'acute-inflammations.csv', TaskType.CLASSIFICATION,
                     ('inflammation',), binary=_ACUTE_FLAGS, drop=('nephritis',),
                     source='UCI Acute Inflammations, bladder inflammation target; '
                            'temperature plus five yes/no flags'),
        DatasetEntry('acute-inflammations-2', 'acute-inflammations.csv', TaskType.CLASSIFICATION,
                     ('nephritis',), binary=_ACUTE_FLAGS, drop=('inflammation',),
                     source='UCI Acute Inflammations, nephritis target; '
                            'temperature plus five yes/no flags'),
        DatasetEntry('breast-cancer', 'breast-cancer-wisconsin.csv', TaskType.CLASSIFICATION,
                     ('class',),
                     sha256='f8c0477cbc30bd6631a1cfd59298c9257e31ebb1f398b8ac7f2c21673c9550ab',
                     source='UCI Breast Cancer Wisconsin (original), 683 rows with the 16 '
                            "'?' rows and the id column removed; class 2 benign, 4 malignant"),
        DatasetEntry('blood-transfusion', 'transfusion.csv', TaskType.CLASSIFICATION, ('donated',),
                     source='UCI Blood Transfusion Service Center'),
        DatasetEntry('abalone', 'abalone.csv', TaskType.REGRESSION, ('rings',),
                     categorical=('sex',), splits=(0.5, 0.1, 0.4),
                     source='UCI Abalone, header row added'),
    )
}


def data_dir() -> Path:
    """Directory searched first: the override when set, otherwise the bundled one."""
    override = os.environ.get(DATA_DIR_ENV)
    return Path(override) if override else BUNDLED_DATA_DIR


def _search_dirs() -> Iterator[Path]:
    override = os.environ.get(DATA_DIR_ENV)
    if override:
        yield Path(override)
    yield BUNDLED_DATA_DIR


def locate(entry: DatasetEntry) -> Optional[Path]:
    for directory in _search_dirs():
        path = directory / entry.filename
        if path.is_file():
            return path
    return None


def is_synthetic(name: str) -> bool:
    return name.startswith(SYNTHETIC_PREFIX)


def get_entry(name: str) -> Optional[DatasetEntry]:
    return REGISTRY.get(name.lower())


def file_sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with path.open('rb') as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b''):
            digest.update(chunk)
    return digest.hexdigest()


def resolve(name_or_path: str) -> Tuple[Path, Optional[DatasetEntry]]:
    """Registry name -> local file (checksum verified); anything else is a path."""
    entry = get_entry(name_or_path)
    if entry is None:
        path = Path(name_or_path)
        if not path.is_file():
            raise DatasetNotFound(f"Dataset '{name_or_path}' is neither a registry name nor a file",
                                  name=name_or_path)
        return path, None

    path = locate(entry)
    if path is None:
        raise DatasetNotFound(
            f"Registry dataset '{entry.name}' expects {data_dir() / entry.filename}; "
            f"place the file there or set {DATA_DIR_ENV}",
            name=entry.name,
        )
    if entry.sha256 is not None:
        actual = file_sha256(path)
        if actual != entry.sha256:
            raise ChecksumMismatch(f"Checksum mismatch for {path}", expected=entry.sha256, actual=actual)
    else:
        logger.debug("No checksum recorded for %s", entry.name)
    return path, entry


def available() -> Dict[str, bool]:
    return {name: locate(entry) is not None for name, entry in REGISTRY.items()}
