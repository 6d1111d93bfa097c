"""
Categorical feature encoders.

``OneHotEncoder`` replaces a column with one indicator per category. ``BinaryEncoder``
is for two-valued flags (yes/no columns) and replaces the column with a single 0/1
column, so a dataset of n flags contributes n features instead of 2n.

Both are fitted on one table and applied to others (the provider test file of a
pre-split dataset); a category the fitting table never showed raises ``EncodeError``.
"""

from __future__ import annotations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from ..exceptions import EncodeError, InvalidState
from .loaders import RawTable


class OneHotEncoder:
    """
    Categorical column -> one indicator column per category, categories ordered by first
    appearance in the fitting table. Indicators replace the column in place.
    """

    def __init__(self, columns: Sequence[str]):
        self._columns = tuple(columns)
        self._categories: Optional[Dict[str, Tuple[str, ...]]] = None

    @property
    def columns(self) -> Tuple[str, ...]:
        return self._columns

    @property
    def categories(self) -> Dict[str, Tuple[str, ...]]:
        if self._categories is None:
            raise InvalidState(f"{type(self).__name__} is not fitted")
        return dict(self._categories)

    def _check_columns(self, table: RawTable) -> None:
        for column in self._columns:
            if column not in table.frame.columns:
                raise EncodeError(f"Column '{column}' not in table", column=column)

    def _fit_column(self, name: str, values: pd.Series) -> Tuple[str, ...]:
        return tuple(str(v) for v in pd.unique(values))

    def _encode_column(self, name: str, values: pd.Series,
                       categories: Tuple[str, ...]) -> List[pd.Series]:
        return [
            pd.Series((values == category).to_numpy(dtype=np.float64),
                      name=f"{name}={category}", index=values.index)
            for category in categories
        ]

    def fit(self, table: RawTable) -> OneHotEncoder:
        self._check_columns(table)
        self._categories = {
            column: self._fit_column(column, table.frame[column].astype(str))
            for column in self._columns
        }
        return self

    def transform(self, table: RawTable) -> RawTable:
        """Encode the fitted columns of ``table``; other columns keep their position."""
        categories = self.categories
        self._check_columns(table)
        pieces: List[pd.Series] = []
        for name in table.frame.columns:
            if name not in categories:
                pieces.append(table.frame[name])
                continue
            values = table.frame[name].astype(str)
            unseen = sorted(set(values) - set(categories[name]))
            if unseen:
                raise EncodeError(f"Unseen categories {unseen} in column '{name}'", column=name)
            pieces.extend(self._encode_column(name, values, categories[name]))
        frame = pd.concat(pieces, axis=1)
        remaining = [c for c in table.categorical if c not in categories]
        return table.with_frame(frame, remaining)

    def fit_transform(self, table: RawTable) -> RawTable:
        return self.fit(table).transform(table)

    def indicator_count(self) -> int:
        return sum(len(v) for v in self.categories.values())


class BinaryEncoder(OneHotEncoder):
    """
    Two-valued column -> one 0/1 column under the original name. Categories are sorted,
    so ``no``/``yes`` map to 0/1; the column is 1 where the value equals the last one.
    """

    def _fit_column(self, name: str, values: pd.Series) -> Tuple[str, ...]:
        categories = tuple(sorted(str(v) for v in pd.unique(values)))
        if len(categories) > 2:
            raise EncodeError(
                f"Column '{name}' has {len(categories)} values; binary encoding needs at most 2",
                column=name,
            )
        return categories

    def _encode_column(self, name: str, values: pd.Series,
                       categories: Tuple[str, ...]) -> List[pd.Series]:
        return [pd.Series((values == categories[-1]).to_numpy(dtype=np.float64),
                          name=name, index=values.index)]

    def indicator_count(self) -> int:
        return len(self.categories)


def one_hot(table: RawTable, columns: Sequence[str]) -> RawTable:
    return OneHotEncoder(columns).fit_transform(table)
