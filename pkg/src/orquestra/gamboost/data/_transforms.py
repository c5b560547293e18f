################################################################################
# © Copyright 2022 Zapata Computing Inc.
################################################################################
from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy as np

from ..errors import ConfigurationError, DataError, DomainError
from ._dataset import ColumnKind, Dataset


def weighted_center(values: np.ndarray, weights: np.ndarray) -> float:
    """Weighted mean of the non-missing values."""
    observed = ~np.isnan(values)
    total = weights[observed].sum()
    if not observed.any() or total <= 0:
        raise DomainError("Cannot center a column without observed, weighted values.")
    return float(np.dot(weights[observed], values[observed]) / total)


def center_continuous(
    ds: Dataset, columns: Sequence[str]
) -> Tuple[Dataset, Dict[str, float]]:
    """Subtract the weighted mean from each of the named continuous columns.

    Missing cells stay missing. Adding `centers[name]` back inverts the
    transformation.

    Raises:
        ConfigurationError: a named column isn't continuous.
        DomainError: a named column has no observed values.
    """
    centers: Dict[str, float] = {}
    updates: Dict[str, np.ndarray] = {}
    weights = ds.weights
    for name in columns:
        if ds.kind(name) != ColumnKind.CONTINUOUS:
            raise ConfigurationError(f"Column '{name}' is not continuous.")
        values = ds.values(name)
        try:
            center = weighted_center(values, weights)
        except DomainError as error:
            raise DomainError(f"Column '{name}': {error}") from error
        centers[name] = center
        updates[name] = values - center
    return ds.with_columns(updates), centers


@dataclass(frozen=True)
class DummyCoding:
    """Treatment coding of one categorical column.

    `matrix` has one 0/1 indicator column per non-reference level, in level
    order; the reference level is the all-zero row.
    """

    column: str
    levels: Tuple[str, ...]
    reference: str
    matrix: np.ndarray

    @property
    def column_labels(self) -> Tuple[str, ...]:
        return tuple(level for level in self.levels if level != self.reference)

    @property
    def coded_levels(self) -> Tuple[int, ...]:
        return tuple(
            code for code, level in enumerate(self.levels) if level != self.reference
        )


def dummy_matrix(codes: np.ndarray, n_levels: int, reference_code: int) -> np.ndarray:
    kept = [code for code in range(n_levels) if code != reference_code]
    return (np.asarray(codes)[:, None] == np.array(kept)[None, :]).astype(float)


def dummy_code(ds: Dataset, column: str) -> DummyCoding:
    """Indicator columns of the non-reference levels of a categorical column.

    Raises:
        ConfigurationError: the column isn't categorical or has fewer than 2 levels.
        DataError: the column has missing values (impute first).
    """
    schema = ds.column_schema(column)
    if schema.kind != ColumnKind.CATEGORICAL:
        raise ConfigurationError(f"Column '{column}' is not categorical.")
    if len(schema.levels) < 2:
        raise ConfigurationError(f"Column '{column}' needs at least 2 levels.")
    if ds.missing(column).any():
        raise DataError(
            f"Column '{column}' has missing values; impute before dummy coding."
        )
    reference_code = schema.levels.index(schema.reference)
    matrix = dummy_matrix(ds.values(column), len(schema.levels), reference_code)
    return DummyCoding(column, schema.levels, schema.reference, matrix)


def decode_dummies(coding: DummyCoding) -> np.ndarray:
    """Level labels (object array) of the rows of a dummy matrix."""
    matrix = np.asarray(coding.matrix)
    sums = matrix.sum(axis=1)
    if np.any((sums != 0) & (sums != 1)):
        raise DataError(
            f"Rows of the dummy matrix of '{coding.column}' aren't 0/1 codes."
        )
    labels = np.array(coding.column_labels + (coding.reference,), dtype=object)
    selected = np.where(sums > 0, matrix.argmax(axis=1), len(coding.column_labels))
    return labels[selected]
