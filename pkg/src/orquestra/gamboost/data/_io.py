################################################################################
# © Copyright 2022 Zapata Computing Inc.
################################################################################
"""CSV input and output of survey tables.

Dialect: comma separated, double-quote escaping, UTF-8, mandatory header,
'.' as decimal point. Empty or unparseable numeric cells are missing.
"""
import logging
from typing import Dict, List, Sequence

import numpy as np
import pandas as pd

from ..errors import ParseError, SchemaError
from ..typing import DumpTarget, LoadSource
from ..utils import ensure_open, format_float
from ._dataset import ColumnKind, ColumnSchema, Dataset, validate_schema

logger = logging.getLogger(__name__)


def _parse_numeric(raw: pd.Series) -> np.ndarray:
    values = pd.to_numeric(raw.str.strip(), errors="coerce").to_numpy(dtype=float)
    values[~np.isfinite(values)] = np.nan
    return values


def _parse_labels(raw: pd.Series, column: ColumnSchema) -> List:
    labels = [None if value == "" else value for value in raw.str.strip()]
    if column.kind == ColumnKind.CATEGORICAL:
        allowed = set(column.levels)
        for row, label in enumerate(labels):
            if label is not None and label not in allowed:
                raise ParseError(
                    f"Value '{label}' is not a declared level {list(column.levels)}",
                    column.name,
                    row + 1,
                )
    return labels


def load_csv(path: LoadSource, schema: Sequence[ColumnSchema]) -> Dataset:
    """Load a survey table and type its columns according to `schema`.

    Columns in the file but not in the schema are ignored. Optional schema
    columns absent from the file are entirely missing.

    Args:
        path: CSV file path or readable file-like object.
        schema: column declarations; header order does not matter.

    Returns:
        The typed dataset.

    Raises:
        SchemaError: a required column is absent from the header.
        ParseError: a categorical cell is not one of the declared levels.
    """
    validate_schema(schema)
    with ensure_open(path) as f:
        frame = pd.read_csv(
            f, dtype=str, keep_default_na=False, na_filter=False, encoding="utf-8"
        )
    n_rows = len(frame)

    data: Dict[str, List] = {}
    for column in schema:
        if column.name not in frame.columns:
            if column.required:
                raise SchemaError(f"Required column '{column.name}' is missing.")
            logger.info("Optional column '%s' absent, all cells missing.", column.name)
            data[column.name] = [None] * n_rows
            continue
        raw = frame[column.name].astype(str)
        if column.kind.is_numeric:
            data[column.name] = list(_parse_numeric(raw))
        else:
            data[column.name] = _parse_labels(raw, column)

    dataset = Dataset.from_arrays(schema, data)
    missing = {name: count for name, count in dataset.missing_counts().items() if count}
    logger.info(
        "Loaded %d rows, %d columns; missing cells per column: %s",
        dataset.n_rows,
        len(schema),
        missing or "none",
    )
    return dataset


def dataset_to_frame(ds: Dataset) -> pd.DataFrame:
    """Text rendering of a dataset, in the dialect read by `load_csv`."""
    columns = {}
    for name in ds.column_names:
        if ds.kind(name).is_numeric:
            columns[name] = [format_float(value) for value in ds.values(name)]
        else:
            labels = ds.labels(name)
            columns[name] = ["" if label is None else label for label in labels]
    return pd.DataFrame(columns, columns=ds.column_names)


def save_csv(ds: Dataset, path: DumpTarget) -> None:
    """Write a dataset so that `load_csv` with the same schema reproduces it."""
    with ensure_open(path, "w") as f:
        dataset_to_frame(ds).to_csv(f, index=False, lineterminator="\n")
