################################################################################
# © Copyright 2022 Zapata Computing Inc.
################################################################################
"""Row filters: plausibility rules, boxplot outliers and complete cases."""
import logging
from dataclasses import dataclass
from typing import Callable, List, Sequence, Tuple

import numpy as np
import pandas as pd
import sympy
from sympy.logic.boolalg import Boolean, BooleanFunction

from ..errors import ConfigurationError
from ..typing import DumpTarget
from ..utils import ensure_open
from ._dataset import ColumnKind, Dataset

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FilterRule:
    """Plausibility condition every retained row has to satisfy.

    `expression` is parsed with sympy, with every column name bound to a
    symbol. Relations (`<`, `<=`, `>`, `>=`, `Eq(a, b)`, `Ne(a, b)`) can be
    combined with `&`, `|`, `~` and `Implies(a, b)`. Categorical columns
    evaluate to their level code, e.g. 0/1 for levels ("no", "yes").
    Note that `a == b` is structural equality in sympy; use `Eq(a, b)`.

    Rows violating the condition are rejected, except when one of the
    referenced cells is missing.

    Example:
        FilterRule("r1", "first sex not after current age", "age_first_sex <= age")
    """

    rule_id: str
    description: str
    expression: str


@dataclass(frozen=True)
class RejectionEntry:
    rule_id: str
    description: str
    rows_rejected: int
    rows_violating: int


@dataclass(frozen=True)
class RejectionReport:
    """Per-rule rejection counts of one filtering step.

    Every removed row is attributed to the first rule it violates, hence
    `sum(entry.rows_rejected) == rows_removed`. `rows_violating` counts all
    violations of a rule, including rows already attributed to earlier rules.
    """

    entries: Tuple[RejectionEntry, ...]
    n_rows_in: int
    rows_removed: int

    @property
    def n_rows_out(self) -> int:
        return self.n_rows_in - self.rows_removed

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "rule_id": [entry.rule_id for entry in self.entries],
                "description": [entry.description for entry in self.entries],
                "rows_rejected": [entry.rows_rejected for entry in self.entries],
            },
            columns=["rule_id", "description", "rows_rejected"],
        )


def save_rejection_report(report: RejectionReport, filename: DumpTarget) -> None:
    with ensure_open(filename, "w") as f:
        report.to_frame().to_csv(f, index=False, lineterminator="\n")


def _apply_violations(
    ds: Dataset,
    checks: Sequence[Tuple[str, str, np.ndarray]],
) -> Tuple[Dataset, RejectionReport]:
    removed = np.zeros(ds.n_rows, dtype=bool)
    entries = []
    for rule_id, description, violations in checks:
        attributed = violations & ~removed
        removed |= violations
        entries.append(
            RejectionEntry(
                rule_id, description, int(attributed.sum()), int(violations.sum())
            )
        )
        logger.info(
            "%s (%s): %d rows violate, %d rejected",
            rule_id,
            description,
            int(violations.sum()),
            int(attributed.sum()),
        )
    report = RejectionReport(tuple(entries), ds.n_rows, int(removed.sum()))
    return ds.take(np.flatnonzero(~removed)), report


def _compile_rule(rule: FilterRule, ds: Dataset) -> Tuple[List[str], Callable]:
    symbols_map = {name: sympy.Symbol(name) for name in ds.column_names}
    try:
        condition = sympy.sympify(rule.expression, locals=symbols_map)
    except (sympy.SympifyError, SyntaxError, TypeError) as error:
        raise ConfigurationError(
            f"Rule '{rule.rule_id}': cannot parse expression '{rule.expression}'."
        ) from error
    if not isinstance(condition, Boolean):
        raise ConfigurationError(
            f"Rule '{rule.rule_id}': expression '{rule.expression}' is not a condition."
        )
    referenced = sorted(str(symbol) for symbol in condition.free_symbols)
    unknown = [name for name in referenced if name not in ds.column_names]
    if unknown:
        raise ConfigurationError(
            f"Rule '{rule.rule_id}' references unknown columns {unknown}."
        )
    if isinstance(condition, BooleanFunction):
        condition = condition.to_nnf(simplify=False)
    function = sympy.lambdify(
        [symbols_map[name] for name in referenced], condition, modules="numpy"
    )
    return referenced, function


def _rule_violations(rule: FilterRule, ds: Dataset) -> np.ndarray:
    referenced, function = _compile_rule(rule, ds)
    evaluable = np.ones(ds.n_rows, dtype=bool)
    for name in referenced:
        evaluable &= ~ds.missing(name)
    rows = np.flatnonzero(evaluable)
    arguments = [ds.values(name)[rows].astype(float) for name in referenced]
    holds = np.broadcast_to(np.asarray(function(*arguments), dtype=bool), rows.shape)
    violations = np.zeros(ds.n_rows, dtype=bool)
    violations[rows] = ~holds
    return violations


def apply_plausibility_filters(
    ds: Dataset, rules: Sequence[FilterRule]
) -> Tuple[Dataset, RejectionReport]:
    """Remove rows violating any of the plausibility rules.

    Args:
        ds: input dataset.
        rules: conditions retained rows must satisfy.

    Returns:
        Dataset with the rows violating no rule (cell values unchanged) and the
        rejection report.

    Raises:
        ConfigurationError: a rule references an unknown column or can't be parsed.
    """
    checks = [
        (rule.rule_id, rule.description, _rule_violations(rule, ds)) for rule in rules
    ]
    return _apply_violations(ds, checks)


def iqr_fences(values: np.ndarray, multiplier: float) -> Tuple[float, float]:
    """Boxplot fences [Q1 - k IQR, Q3 + k IQR] of the non-missing values.

    Quartiles use linear interpolation between order statistics.
    """
    observed = values[~np.isnan(values)]
    q1, q3 = np.quantile(observed, [0.25, 0.75], method="linear")
    spread = q3 - q1
    return float(q1 - multiplier * spread), float(q3 + multiplier * spread)


def remove_outliers_iqr(
    ds: Dataset, columns: Sequence[str], multiplier: float = 1.5
) -> Tuple[Dataset, RejectionReport]:
    """Remove rows with a value outside of the boxplot fences of some column.

    Fences are computed once, on the input dataset; the removal is a single
    pass. Missing values never trigger removal.

    Raises:
        ConfigurationError: a named column isn't continuous or multiplier <= 0.
    """
    if not multiplier > 0:
        raise ConfigurationError(
            f"Outlier multiplier must be positive, got {multiplier}."
        )
    checks = []
    for name in columns:
        if ds.kind(name) != ColumnKind.CONTINUOUS:
            raise ConfigurationError(
                f"Outlier removal needs a continuous column, '{name}' is "
                f"{ds.kind(name).value}."
            )
        values = ds.values(name)
        if np.isnan(values).all():
            logger.warning("Column '%s' has no observed values, no fences.", name)
            continue
        low, high = iqr_fences(values, multiplier)
        with np.errstate(invalid="ignore"):
            violations = (values < low) | (values > high)
        description = f"{name} outside [{low:.6g}, {high:.6g}]"
        checks.append((f"iqr:{name}", description, violations))
    return _apply_violations(ds, checks)


def drop_incomplete_rows(ds: Dataset) -> Tuple[Dataset, RejectionReport]:
    """Keep complete cases only."""
    checks = [
        (f"missing:{name}", f"{name} is missing", ds.missing(name))
        for name in ds.column_names
    ]
    return _apply_violations(ds, checks)
