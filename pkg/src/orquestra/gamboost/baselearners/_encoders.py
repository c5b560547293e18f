################################################################################
# © Copyright 2022 Zapata Computing Inc.
################################################################################
"""Rebuild learner design matrices from data or evaluation grids.

Encoders take a mapping from column name to raw values: floats for numeric
columns, level labels for categorical and identifier columns.
"""
from abc import abstractmethod
from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Protocol, Sequence, Tuple

import numpy as np

from ..basis import KnotGrid, bspline_design, row_tensor
from ..data import Dataset
from ..data._transforms import dummy_matrix
from ..errors import DataError

ColumnValues = Mapping[str, np.ndarray]


class DesignEncoder(Protocol):
    @property
    @abstractmethod
    def columns(self) -> Tuple[str, ...]:
        """Data columns the design is computed from."""

    @abstractmethod
    def build(self, values: ColumnValues, n_rows: int) -> np.ndarray:
        """Design matrix of `n_rows` rows for the given column values."""


def column_values(ds: Dataset, names: Sequence[str]) -> Dict[str, np.ndarray]:
    """Raw values of complete columns, in the form encoders expect.

    Raises:
        DataError: a column has missing cells.
    """
    values = {}
    for name in names:
        if ds.missing(name).any():
            raise DataError(f"Column '{name}' has missing values.")
        values[name] = ds.values(name) if ds.kind(name).is_numeric else ds.labels(name)
    return values


def encode(encoder: DesignEncoder, ds: Dataset) -> np.ndarray:
    return encoder.build(column_values(ds, encoder.columns), ds.n_rows)


def level_codes(labels: np.ndarray, levels: Sequence[str], column: str) -> np.ndarray:
    """Positions of `labels` in `levels`.

    Raises:
        DataError: a label is not one of the known levels.
    """
    index = {level: code for code, level in enumerate(levels)}
    codes = np.empty(len(labels), dtype=np.int64)
    for row, label in enumerate(labels):
        try:
            codes[row] = index[label]
        except KeyError:
            raise DataError(
                f"Level '{label}' of column '{column}' was not seen in training."
            ) from None
    return codes


@dataclass(frozen=True)
class Modifier:
    """0/1 indicator of one level of a categorical column (varying coefficients)."""

    column: str
    levels: Tuple[str, ...]
    level: str

    def indicator(self, values: ColumnValues) -> np.ndarray:
        codes = level_codes(values[self.column], self.levels, self.column)
        return (codes == self.levels.index(self.level)).astype(float)


def _scaled(design: np.ndarray, modifier: Optional[Modifier], values: ColumnValues):
    if modifier is None:
        return design
    return design * modifier.indicator(values)[:, None]


def _modifier_columns(modifier: Optional[Modifier]) -> Tuple[str, ...]:
    return () if modifier is None else (modifier.column,)


@dataclass(frozen=True)
class InterceptEncoder:
    @property
    def columns(self) -> Tuple[str, ...]:
        return ()

    def build(self, values: ColumnValues, n_rows: int) -> np.ndarray:
        return np.ones((n_rows, 1))


@dataclass(frozen=True)
class DummyEncoder:
    """Indicators of the non-reference levels of a categorical column."""

    column: str
    levels: Tuple[str, ...]
    reference: str

    @property
    def columns(self) -> Tuple[str, ...]:
        return (self.column,)

    @property
    def coded_levels(self) -> Tuple[str, ...]:
        return tuple(level for level in self.levels if level != self.reference)

    def build(self, values: ColumnValues, n_rows: int) -> np.ndarray:
        codes = level_codes(values[self.column], self.levels, self.column)
        return dummy_matrix(codes, len(self.levels), self.levels.index(self.reference))


@dataclass(frozen=True)
class RandomInterceptEncoder:
    """One indicator per level of a grouping column."""

    column: str
    levels: Tuple[str, ...]

    @property
    def columns(self) -> Tuple[str, ...]:
        return (self.column,)

    def build(self, values: ColumnValues, n_rows: int) -> np.ndarray:
        codes = level_codes(values[self.column], self.levels, self.column)
        return (codes[:, None] == np.arange(len(self.levels))[None, :]).astype(float)


@dataclass(frozen=True)
class LinearEncoder:
    """Centered covariate, optionally scaled by a level indicator."""

    column: str
    center: float
    modifier: Optional[Modifier] = None

    @property
    def columns(self) -> Tuple[str, ...]:
        return (self.column,) + _modifier_columns(self.modifier)

    def build(self, values: ColumnValues, n_rows: int) -> np.ndarray:
        x = np.asarray(values[self.column], dtype=float)
        return _scaled((x - self.center)[:, None], self.modifier, values)


@dataclass(frozen=True, eq=False)
class NonlinearEncoder:
    """Nonlinear part of a decomposed P-spline, optionally scaled by a level
    indicator."""

    column: str
    grid: KnotGrid
    transform: np.ndarray
    projection: np.ndarray
    center: float
    modifier: Optional[Modifier] = None

    @property
    def columns(self) -> Tuple[str, ...]:
        return (self.column,) + _modifier_columns(self.modifier)

    def build(self, values: ColumnValues, n_rows: int) -> np.ndarray:
        x = self.grid.clamp(values[self.column])
        parametric = np.column_stack([np.ones_like(x), x - self.center])
        design = bspline_design(x, self.grid) @ self.transform
        design = design - parametric @ self.projection
        return _scaled(design, self.modifier, values)


@dataclass(frozen=True, eq=False)
class TensorEncoder:
    """Row-wise tensor product of two B-spline bases, columns centered."""

    first: str
    second: str
    grids: Tuple[KnotGrid, KnotGrid]
    column_means: np.ndarray

    @property
    def columns(self) -> Tuple[str, ...]:
        return (self.first, self.second)

    def build(self, values: ColumnValues, n_rows: int) -> np.ndarray:
        design = row_tensor(
            bspline_design(values[self.first], self.grids[0]),
            bspline_design(values[self.second], self.grids[1]),
        )
        return design - self.column_means[None, :]
