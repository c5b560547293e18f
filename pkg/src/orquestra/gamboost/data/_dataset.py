################################################################################
# © Copyright 2022 Zapata Computing Inc.
################################################################################
"""Typed, immutable columnar survey table."""
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..errors import ConfigurationError, DataError, ParseError

MISSING_CODE = -1


class ColumnKind(str, Enum):
    CONTINUOUS = "continuous"
    CATEGORICAL = "categorical"
    IDENTIFIER = "identifier"
    WEIGHT = "weight"
    COORDINATE = "coordinate"

    @property
    def is_numeric(self) -> bool:
        return self in (ColumnKind.CONTINUOUS, ColumnKind.WEIGHT, ColumnKind.COORDINATE)


@dataclass(frozen=True)
class ColumnSchema:
    """Declaration of one column of a survey table.

    Args:
        name: column name, as it appears in the CSV header.
        kind: how cells of the column are interpreted.
        levels: admissible labels of a categorical column, in coding order.
            Identifier columns take their levels from the data instead.
        reference: reference level of a categorical column. Defaults to the
            first level.
        required: whether the column has to be present in the input file.
    """

    name: str
    kind: ColumnKind
    levels: Tuple[str, ...] = ()
    reference: Optional[str] = None
    required: bool = True

    def __post_init__(self):
        object.__setattr__(self, "kind", ColumnKind(self.kind))
        object.__setattr__(self, "levels", tuple(self.levels))
        if not self.name:
            raise ConfigurationError("Column names must be non-empty.")
        if self.kind == ColumnKind.CATEGORICAL:
            if not self.levels:
                raise ConfigurationError(
                    f"Categorical column '{self.name}' declares no levels."
                )
            if any(level == "" for level in self.levels):
                raise ConfigurationError(
                    f"Categorical column '{self.name}' has an empty level label."
                )
            if len(set(self.levels)) != len(self.levels):
                raise ConfigurationError(
                    f"Categorical column '{self.name}' has duplicated levels."
                )
            if self.reference is None:
                object.__setattr__(self, "reference", self.levels[0])
            elif self.reference not in self.levels:
                raise ConfigurationError(
                    f"Reference level '{self.reference}' of column '{self.name}' "
                    "is not one of its levels."
                )
        elif self.levels or self.reference is not None:
            raise ConfigurationError(
                f"Only categorical columns declare levels (column '{self.name}')."
            )

    def to_dict(self) -> Dict[str, Any]:
        dictionary: Dict[str, Any] = {"name": self.name, "kind": self.kind.value}
        if self.kind == ColumnKind.CATEGORICAL:
            dictionary["levels"] = list(self.levels)
            dictionary["reference"] = self.reference
        if not self.required:
            dictionary["required"] = False
        return dictionary

    @classmethod
    def from_dict(cls, dictionary: Mapping[str, Any]) -> "ColumnSchema":
        try:
            kind = ColumnKind(dictionary["kind"])
        except (KeyError, ValueError) as error:
            raise ConfigurationError(
                f"Invalid column kind for column '{dictionary.get('name')}'."
            ) from error
        return cls(
            name=dictionary["name"],
            kind=kind,
            levels=tuple(dictionary.get("levels", ())),
            reference=dictionary.get("reference"),
            required=dictionary.get("required", True),
        )


def validate_schema(schema: Sequence[ColumnSchema]) -> None:
    names = [column.name for column in schema]
    duplicated = sorted({name for name in names if names.count(name) > 1})
    if duplicated:
        raise ConfigurationError(f"Schema declares columns twice: {duplicated}.")
    weight_columns = [c.name for c in schema if c.kind == ColumnKind.WEIGHT]
    if len(weight_columns) > 1:
        raise ConfigurationError(
            f"At most one weight column is allowed, got {weight_columns}."
        )


def _readonly(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class Dataset:
    """Immutable columnar table with survey weights and missingness.

    Numeric columns (continuous, coordinate, weight) hold floats with NaN for
    missing cells. Categorical and identifier columns hold integer codes into
    `levels[name]` with -1 for missing cells.

    Use `Dataset.from_arrays` to build a dataset from raw values.
    """

    schema: Tuple[ColumnSchema, ...]
    columns: Mapping[str, np.ndarray]
    levels: Mapping[str, Tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "schema", tuple(self.schema))
        validate_schema(self.schema)
        columns = {}
        levels = {}
        lengths = set()
        for column in self.schema:
            if column.name not in self.columns:
                raise DataError(f"Dataset has no values for column '{column.name}'.")
            values = np.asarray(self.columns[column.name])
            if column.kind.is_numeric:
                values = values.astype(float)
            else:
                values = values.astype(np.int64)
                column_levels = (
                    column.levels
                    if column.kind == ColumnKind.CATEGORICAL
                    else tuple(self.levels.get(column.name, ()))
                )
                if values.size and (
                    values.min() < MISSING_CODE or values.max() >= len(column_levels)
                ):
                    raise DataError(
                        f"Codes of column '{column.name}' are not valid level indices."
                    )
                levels[column.name] = column_levels
            lengths.add(values.shape[0])
            columns[column.name] = _readonly(values)
        if len(lengths) > 1:
            raise DataError(f"Columns have different lengths: {sorted(lengths)}.")
        object.__setattr__(self, "columns", columns)
        object.__setattr__(self, "levels", levels)
        self._validate_weights()

    def _validate_weights(self):
        name = self.weight_column
        if name is None:
            return
        weights = self.columns[name]
        if not np.all(np.isfinite(weights)):
            raise DataError(f"Weight column '{name}' has missing or infinite values.")
        if np.any(weights < 0):
            raise DataError(f"Weight column '{name}' has negative values.")
        if weights.size and not np.any(weights > 0):
            raise DataError(f"Weight column '{name}' is zero everywhere.")

    @classmethod
    def from_arrays(
        cls, schema: Sequence[ColumnSchema], data: Mapping[str, Iterable]
    ) -> "Dataset":
        """Build a dataset from raw values.

        Numeric columns accept floats, with None or NaN as missing. Categorical
        and identifier columns accept labels, with None or "" as missing.
        """
        columns: Dict[str, np.ndarray] = {}
        levels: Dict[str, Tuple[str, ...]] = {}
        for column in schema:
            raw = list(data[column.name])
            if column.kind.is_numeric:
                columns[column.name] = np.array(
                    [np.nan if value is None else float(value) for value in raw],
                    dtype=float,
                )
                continue
            labels = [None if value in (None, "") else str(value) for value in raw]
            if column.kind == ColumnKind.CATEGORICAL:
                column_levels = column.levels
            else:
                column_levels = tuple(sorted({l for l in labels if l is not None}))
            index = {level: code for code, level in enumerate(column_levels)}
            codes = np.empty(len(labels), dtype=np.int64)
            for row, label in enumerate(labels):
                if label is None:
                    codes[row] = MISSING_CODE
                elif label in index:
                    codes[row] = index[label]
                else:
                    raise ParseError(
                        f"Value '{label}' is not a declared level "
                        f"{list(column_levels)}",
                        column.name,
                        row + 1,
                    )
            columns[column.name] = codes
            levels[column.name] = column_levels
        return cls(tuple(schema), columns, levels)

    @property
    def n_rows(self) -> int:
        if not self.schema:
            return 0
        return int(self.columns[self.schema[0].name].shape[0])

    @property
    def column_names(self) -> List[str]:
        return [column.name for column in self.schema]

    @property
    def weight_column(self) -> Optional[str]:
        for column in self.schema:
            if column.kind == ColumnKind.WEIGHT:
                return column.name
        return None

    @property
    def weights(self) -> np.ndarray:
        """Per-row survey weights (all ones when the schema has no weight column)."""
        name = self.weight_column
        if name is None:
            return np.ones(self.n_rows)
        return np.array(self.columns[name], dtype=float)

    def column_schema(self, name: str) -> ColumnSchema:
        for column in self.schema:
            if column.name == name:
                return column
        raise ConfigurationError(f"Unknown column '{name}'.")

    def kind(self, name: str) -> ColumnKind:
        return self.column_schema(name).kind

    def values(self, name: str) -> np.ndarray:
        """Stored values: floats for numeric columns, level codes otherwise."""
        self.column_schema(name)
        return self.columns[name]

    def labels(self, name: str) -> np.ndarray:
        """Level labels of a categorical or identifier column (None if missing)."""
        if self.kind(name).is_numeric:
            raise ConfigurationError(f"Column '{name}' has no level labels.")
        codes = self.columns[name]
        lookup = np.array(list(self.levels[name]) + [None], dtype=object)
        return lookup[codes]

    def reference(self, name: str) -> Optional[str]:
        return self.column_schema(name).reference

    def missing(self, name: str) -> np.ndarray:
        values = self.values(name)
        if self.kind(name).is_numeric:
            return np.isnan(values)
        return values == MISSING_CODE

    def missing_counts(self) -> Dict[str, int]:
        return {name: int(self.missing(name).sum()) for name in self.column_names}

    def incomplete_rows(self) -> np.ndarray:
        mask = np.zeros(self.n_rows, dtype=bool)
        for name in self.column_names:
            mask |= self.missing(name)
        return mask

    def is_complete(self) -> bool:
        return not self.incomplete_rows().any()

    def take(self, rows: np.ndarray) -> "Dataset":
        """Dataset restricted to the given row indices (or boolean mask)."""
        rows = np.asarray(rows)
        return Dataset(
            self.schema,
            {name: values[rows] for name, values in self.columns.items()},
            self.levels,
        )

    def with_columns(self, updates: Mapping[str, np.ndarray]) -> "Dataset":
        """Copy of the dataset with some columns replaced (stored representation)."""
        for name in updates:
            self.column_schema(name)
        columns = dict(self.columns)
        columns.update(updates)
        return Dataset(self.schema, columns, self.levels)

    def __repr__(self) -> str:
        return f"Dataset(n_rows={self.n_rows}, columns={self.column_names})"
