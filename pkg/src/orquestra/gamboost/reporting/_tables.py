################################################################################
# © Copyright 2022 Zapata Computing Inc.
################################################################################
import pandas as pd

from ..typing import DumpTarget, LoadSource
from ..utils import ensure_open

COEFFICIENT_COLUMNS = ("level", "factor", "estimate", "ci_low", "ci_high")


def save_coefficient_table(table: pd.DataFrame, filename: DumpTarget) -> None:
    """Write a coefficient table; missing limits become empty cells."""
    with ensure_open(filename, "w") as f:
        table.loc[:, list(COEFFICIENT_COLUMNS)].to_csv(
            f, index=False, lineterminator="\n"
        )


def load_coefficient_table(file: LoadSource) -> pd.DataFrame:
    with ensure_open(file) as f:
        table = pd.read_csv(
            f,
            dtype={"level": str, "factor": str},
            keep_default_na=False,
            na_values={"estimate": [""], "ci_low": [""], "ci_high": [""]},
        )
    return table
