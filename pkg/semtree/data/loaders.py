"""
Tabular readers: header-mandatory CSV (through pandas) and sparse LIBSVM text.

Both return a ``RawTable``: feature cells (numeric, or strings for declared categorical
columns) plus the raw target column(s).
"""

from __future__ import annotations
import logging
import re
from dataclasses import dataclass, replace
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..exceptions import EncodeError, ParseError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
LIBSVM_LABEL = 'label'
_PANDAS_LINE = re.compile(r'line (\d+)')


@dataclass(frozen=True)
class RawTable:
    frame: pd.DataFrame
    target_columns: Tuple[str, ...]
    categorical: Tuple[str, ...] = ()
    source: Optional[str] = None

    @property
    def num_rows(self) -> int:
        return int(len(self.frame))

    @property
    def feature_columns(self) -> Tuple[str, ...]:
        return tuple(c for c in self.frame.columns if c not in self.target_columns)

    def feature_matrix(self) -> np.ndarray:
        if self.categorical:
            raise EncodeError(
                f"Categorical columns {list(self.categorical)} must be one-hot encoded first",
                column=self.categorical[0],
            )
        columns = list(self.feature_columns)
        return self.frame[columns].to_numpy(dtype=np.float64, copy=True)

    def target_values(self) -> np.ndarray:
        return self.frame[list(self.target_columns)].to_numpy(copy=True)

    def with_frame(self, frame: pd.DataFrame, categorical: Sequence[str]) -> RawTable:
        return replace(self, frame=frame, categorical=tuple(categorical))


def _line_of(row_position: int) -> int:
    # header is line 1
    return row_position + 2


def load_csv(
    path: PathLike,
    target: Sequence[str] = (),
    categorical: Sequence[str] = (),
    drop: Sequence[str] = (),
    numeric_target: bool = False,
) -> RawTable:
    """
    Parse an RFC-4180 CSV with a header row. Non-categorical feature cells must parse
    as reals; the default target is the last column.
    """
    path = Path(path)
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, skip_blank_lines=True,
                            encoding='utf-8')
    except pd.errors.ParserError as exc:
        match = _PANDAS_LINE.search(str(exc))
        raise ParseError(f"Ragged row: {exc}", line=int(match.group(1)) if match else None,
                         path=str(path)) from exc
    except pd.errors.EmptyDataError as exc:
        raise ParseError("File has no header row", line=1, path=str(path)) from exc
    except (OSError, UnicodeDecodeError) as exc:
        raise ParseError(f"Cannot read file: {exc}", path=str(path)) from exc

    short = frame.isna().any(axis=1).to_numpy()
    if short.any():
        row = int(np.flatnonzero(short)[0])
        raise ParseError(f"Ragged row: expected {frame.shape[1]} fields", line=_line_of(row),
                         path=str(path))

    frame.columns = [str(c).strip() for c in frame.columns]
    targets = tuple(target) if target else (frame.columns[-1],)
    for name in (*targets, *categorical, *drop):
        if name not in frame.columns:
            raise ParseError(f"Column '{name}' not in header {list(frame.columns)}", line=1,
                             path=str(path))
    if drop:
        frame = frame.drop(columns=list(drop))

    numeric = [c for c in frame.columns if c not in categorical and c not in targets]
    if numeric_target:
        numeric.extend(targets)
    for column in numeric:
        values = pd.to_numeric(frame[column].str.strip(), errors='coerce')
        bad = values.isna().to_numpy()
        if bad.any():
            row = int(np.flatnonzero(bad)[0])
            raise ParseError(
                f"Column '{column}': cannot parse {frame[column].iloc[row]!r} as a number",
                line=_line_of(row), path=str(path),
            )
        frame[column] = values.astype(np.float64)

    logger.debug("Loaded %s: %d rows, %d columns", path, len(frame), frame.shape[1])
    return RawTable(frame=frame.reset_index(drop=True), target_columns=targets,
                    categorical=tuple(categorical), source=str(path))


def _parse_libsvm_line(text: str, line: int, path: str) -> Tuple[str, List[Tuple[int, float]]]:
    tokens = text.split()
    label, entries = tokens[0], []
    previous = 0
    for token in tokens[1:]:
        index_text, sep, value_text = token.partition(':')
        if not sep:
            raise ParseError(f"Malformed feature '{token}'", line=line, path=path)
        try:
            index, value = int(index_text), float(value_text)
        except ValueError as exc:
            raise ParseError(f"Malformed feature '{token}'", line=line, path=path) from exc
        if index <= previous:
            raise ParseError(
                f"Feature indices must be 1-based and ascending ({index} after {previous})",
                line=line, path=path,
            )
        entries.append((index, value))
        previous = index
    return label, entries


def load_libsvm(path: PathLike, num_features: Optional[int] = None,
                numeric_target: bool = False) -> RawTable:
    """``<label>( <idx>:<val>)*`` per line; absent indices are zero."""
    path = Path(path)
    labels: List[str] = []
    rows: List[List[Tuple[int, float]]] = []
    try:
        with path.open('r', encoding='utf-8') as handle:
            for line_no, text in enumerate(handle, start=1):
                if not text.strip():
                    continue
                label, entries = _parse_libsvm_line(text, line_no, str(path))
                labels.append(label)
                rows.append(entries)
    except (OSError, UnicodeDecodeError) as exc:
        raise ParseError(f"Cannot read file: {exc}", path=str(path)) from exc

    width = max((entries[-1][0] for entries in rows if entries), default=0)
    if num_features is not None:
        if width > num_features:
            raise ParseError(f"Feature index {width} exceeds declared dimension {num_features}",
                             path=str(path))
        width = num_features

    matrix = np.zeros((len(rows), width), dtype=np.float64)
    for r, entries in enumerate(rows):
        for index, value in entries:
            matrix[r, index - 1] = value

    frame = pd.DataFrame(matrix, columns=[f"f{i}" for i in range(1, width + 1)])
    if numeric_target:
        try:
            frame[LIBSVM_LABEL] = np.asarray(labels, dtype=np.float64)
        except ValueError as exc:
            raise ParseError(f"Non-numeric regression label: {exc}", path=str(path)) from exc
    else:
        frame[LIBSVM_LABEL] = labels
    logger.debug("Loaded %s: %d rows, %d features", path, len(rows), width)
    return RawTable(frame=frame, target_columns=(LIBSVM_LABEL,), source=str(path))


def _format_label(value) -> str:
    if isinstance(value, str):
        return value
    value = float(value)
    return str(int(value)) if value.is_integer() else repr(value)


def format_libsvm_row(label, values: np.ndarray) -> str:
    parts = [_format_label(label)]
    parts.extend(f"{i + 1}:{float(v)!r}" for i, v in enumerate(values) if v != 0)
    return ' '.join(parts)


def write_libsvm(table: RawTable, path: PathLike) -> Path:
    """Canonical writer: zero entries omitted, shortest round-trip float text."""
    path = Path(path)
    X = table.feature_matrix()
    labels = table.frame[table.target_columns[0]].tolist()
    with path.open('w', encoding='utf-8') as handle:
        for label, row in zip(labels, X):
            handle.write(format_libsvm_row(label, row) + '\n')
    return path
