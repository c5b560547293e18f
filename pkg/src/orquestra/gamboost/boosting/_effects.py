################################################################################
# © Copyright 2022 Zapata Computing Inc.
################################################################################
"""Partial effects of model terms and the coefficient table."""
import warnings
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..baselearners import (
    DummyEncoder,
    LearnerKind,
    RandomInterceptEncoder,
    TermKind,
    TermSpec,
)
from ._model import FittedModel

CONTINUOUS_GRID_SIZE = 50
OFFSET_KEY = "(offset)"
SURFACE_GRID_SIZE = 20

Grid = Union[np.ndarray, Sequence[float], Sequence[str]]
CoefficientBands = Mapping[str, Tuple[np.ndarray, np.ndarray]]


@dataclass(frozen=True, eq=False)
class PartialEffect:
    """Contribution of one term to the additive predictor, on a grid.

    `grid` holds floats for single-covariate terms, level labels for
    categorical and random-intercept terms, and (k, 2) covariate pairs for
    surfaces. `lower` and `upper` are pointwise band limits at confidence
    `level`; they are None for point estimates.
    """

    term_id: str
    label: str
    columns: Tuple[str, ...]
    grid: np.ndarray
    estimate: np.ndarray
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None
    level: float = 0.95

    def __post_init__(self):
        n_points = len(self.grid)
        for name in ("estimate", "lower", "upper"):
            values = getattr(self, name)
            if values is not None and len(values) != n_points:
                raise ValueError(
                    f"Partial effect of '{self.term_id}': {name} has {len(values)} "
                    f"values for {n_points} grid points."
                )
        if self.lower is not None and self.upper is not None:
            if np.any(self.lower > self.upper):
                raise ValueError(
                    f"Partial effect of '{self.term_id}': lower band above upper."
                )

    @property
    def is_categorical(self) -> bool:
        return self.grid.dtype == object

    @property
    def has_band(self) -> bool:
        return self.lower is not None and self.upper is not None

    def to_frame(self) -> pd.DataFrame:
        if self.grid.ndim == 2:
            frame = pd.DataFrame(
                {self.columns[0]: self.grid[:, 0], self.columns[1]: self.grid[:, 1]}
            )
        else:
            frame = pd.DataFrame({self.columns[0]: self.grid})
        frame["estimate"] = self.estimate
        if self.has_band:
            frame["lower"] = self.lower
            frame["upper"] = self.upper
        return frame


def _clamped(model: FittedModel, column: str, values: np.ndarray) -> np.ndarray:
    low, high = model.ranges[column]
    outside = (values < low) | (values > high)
    if outside.any():
        warnings.warn(
            f"{int(outside.sum())} grid values of '{column}' outside of the training "
            f"range [{low}, {high}] were clamped.",
            UserWarning,
        )
    return np.clip(values, low, high)


def _levels(model: FittedModel, term: TermSpec) -> Tuple[str, ...]:
    encoder = model.term_learners(term.term_id)[0].encoder
    if isinstance(encoder, (DummyEncoder, RandomInterceptEncoder)):
        return encoder.levels
    raise TypeError(f"Term '{term.term_id}' has no levels.")


def default_grid(model: FittedModel, term_id: str) -> np.ndarray:
    """50 points over the training range, all levels or a 20×20 lattice."""
    term = model.formula.term(term_id)
    if term.kind in (TermKind.CATEGORICAL, TermKind.RANDOM):
        return np.array(_levels(model, term), dtype=object)
    if term.kind in (TermKind.SURFACE, TermKind.SPATIAL):
        axes = [
            np.linspace(*model.ranges[name], SURFACE_GRID_SIZE) for name in term.columns
        ]
        first, second = np.meshgrid(*axes, indexing="ij")
        return np.column_stack([first.ravel(), second.ravel()])
    return np.linspace(*model.ranges[term.columns[0]], CONTINUOUS_GRID_SIZE)


def grid_values(
    model: FittedModel, term_id: str, grid: Optional[Grid] = None
) -> Tuple[np.ndarray, Dict[str, np.ndarray]]:
    """Grid of a term and the column values its learners are evaluated at.

    Continuous values are clamped to the training range with a warning.
    Interaction terms are evaluated at their modifier level.
    """
    term = model.formula.term(term_id)
    if grid is None:
        grid = default_grid(model, term_id)
    if term.kind in (TermKind.CATEGORICAL, TermKind.RANDOM):
        grid = np.array([str(level) for level in grid], dtype=object)
        return grid, {term.columns[0]: grid}
    grid = np.asarray(grid, dtype=float)
    if term.kind in (TermKind.SURFACE, TermKind.SPATIAL):
        if grid.ndim != 2 or grid.shape[1] != 2:
            raise ValueError(f"Surface '{term_id}' needs a (k, 2) grid.")
        grid = np.column_stack(
            [_clamped(model, name, grid[:, i]) for i, name in enumerate(term.columns)]
        )
        return grid, {name: grid[:, i] for i, name in enumerate(term.columns)}
    grid = _clamped(model, term.columns[0], grid.ravel())
    values = {term.columns[0]: grid}
    if term.kind == TermKind.INTERACTION:
        modifier = model.term_learners(term_id)[0].encoder.modifier
        values[modifier.column] = np.array([modifier.level] * len(grid), dtype=object)
    return grid, values


def term_contribution(
    model: FittedModel,
    term_id: str,
    values: Mapping[str, np.ndarray],
    n_points: int,
    coefficients: Optional[Mapping[str, np.ndarray]] = None,
) -> np.ndarray:
    coefficients = model.coefficients if coefficients is None else coefficients
    total = np.zeros(n_points)
    for learner in model.term_learners(term_id):
        coefficient = coefficients.get(learner.learner_id)
        if coefficient is None or not np.any(coefficient):
            continue
        total = total + learner.encoder.build(values, n_points) @ coefficient
    return total


def partial_effect(
    model: FittedModel, term_id: str, grid: Optional[Grid] = None
) -> PartialEffect:
    """Point estimate of a term's contribution to η on a grid.

    Decomposed terms add up their linear and nonlinear parts; every other
    term is left out. Categorical terms report one value per level, zero for
    the reference level. Terms that were never selected are zero everywhere.

    Raises:
        ConfigurationError: unknown term.
    """
    term = model.formula.term(term_id)
    grid, values = grid_values(model, term_id, grid)
    estimate = term_contribution(model, term_id, values, len(grid))
    return PartialEffect(term_id, term.display_label, term.columns, grid, estimate)


def coefficient_rows(model: FittedModel, learner) -> List[Tuple[str, str, int]]:
    term = model.formula.term(learner.term_id)
    label = term.display_label
    if learner.kind == LearnerKind.LINEAR_CATEGORICAL:
        return [
            (term.group or "", f"{label} {level}", index)
            for index, level in enumerate(learner.encoder.coded_levels)
        ]
    if learner.kind == LearnerKind.SMOOTH_LINEAR:
        return [(term.group or "", f"{label} (linear)", 0)]
    if learner.kind == LearnerKind.VARYING_COEFFICIENT_LINEAR:
        modifier = learner.encoder.modifier
        factor = f"{label} (linear) by {modifier.column} {modifier.level}"
        return [(term.group or "", factor, 0)]
    return [(term.group or "", label, 0)]


def coefficient_table(
    model: FittedModel, bands: Optional[CoefficientBands] = None
) -> pd.DataFrame:
    """Offset and selected parametric coefficients, one row each.

    Columns: level (term group), factor, estimate, ci_low, ci_high. The
    interval columns are empty unless `bands` maps learner ids (or
    `OFFSET_KEY`) to lower and upper coefficient limits. The offset row holds
    the offset plus the intercept learner coefficient.
    """
    bands = bands or {}
    rows = []
    low, high = bands.get(OFFSET_KEY, (None, None))
    rows.append(
        (
            "",
            OFFSET_KEY,
            model.intercept,
            np.nan if low is None else float(low[0]),
            np.nan if high is None else float(high[0]),
        )
    )
    selected = set(model.selected_ids)
    for learner in model.learners:
        if not learner.kind.is_parametric or learner.learner_id not in selected:
            continue
        coefficient = model.coefficients[learner.learner_id]
        low, high = bands.get(learner.learner_id, (None, None))
        for group, factor, index in coefficient_rows(model, learner):
            rows.append(
                (
                    group,
                    factor,
                    float(coefficient[index]),
                    np.nan if low is None else float(low[index]),
                    np.nan if high is None else float(high[index]),
                )
            )
    return pd.DataFrame(
        rows, columns=["level", "factor", "estimate", "ci_low", "ci_high"]
    )
