################################################################################
# © Copyright 2022 Zapata Computing Inc.
################################################################################
"""Model formulas and their translation into base learners."""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Mapping, Optional, Tuple

import numpy as np

from ..basis import (
    KnotGrid,
    PenaltyMatrix,
    bspline_design,
    decompose_pspline,
    difference_penalty,
    kronecker_sum_penalty,
    ridge_penalty,
    row_tensor,
    zero_penalty,
)
from ..data import ColumnKind, Dataset
from ..errors import ConfigurationError, DataError
from ..utils import normalize_weights
from ._encoders import (
    DummyEncoder,
    InterceptEncoder,
    LinearEncoder,
    Modifier,
    NonlinearEncoder,
    RandomInterceptEncoder,
    TensorEncoder,
    column_values,
    encode,
)
from ._learner import BaseLearner, LearnerKind, calibrate_lambda_for_df

logger = logging.getLogger(__name__)

INTERCEPT_ID = "(intercept)"

_CONTINUOUS_KINDS = (ColumnKind.CONTINUOUS, ColumnKind.COORDINATE)
_GROUPING_KINDS = (ColumnKind.IDENTIFIER, ColumnKind.CATEGORICAL)
_MAX_UNPENALIZED_DUMMIES = 2


class TermKind(str, Enum):
    CATEGORICAL = "categorical"
    LINEAR = "linear"
    SMOOTH = "smooth"
    INTERACTION = "interaction"
    SURFACE = "surface"
    SPATIAL = "spatial"
    RANDOM = "random"


_N_COLUMNS = {
    TermKind.CATEGORICAL: 1,
    TermKind.LINEAR: 1,
    TermKind.SMOOTH: 1,
    TermKind.INTERACTION: 1,
    TermKind.SURFACE: 2,
    TermKind.SPATIAL: 2,
    TermKind.RANDOM: 1,
}


@dataclass(frozen=True)
class TermSpec:
    """One term of the additive predictor.

    Args:
        term_id: unique id used in reports (no ':' allowed).
        kind: construction rule of the term's learners.
        columns: covariate column(s); two for surfaces and spatial terms.
        label: human readable name, defaults to `term_id`.
        by: categorical modifier column of an interaction term.
        by_level: modifier level whose indicator scales the smooth effect.
            Defaults to the non-reference level of a binary modifier.
        df: degrees of freedom of the penalized learners of this term,
            overriding the formula default.
        group: optional heading the term is reported under in coefficient
            tables, e.g. a level of an ecological model ("individual").
    """

    term_id: str
    kind: TermKind
    columns: Tuple[str, ...]
    label: Optional[str] = None
    by: Optional[str] = None
    by_level: Optional[str] = None
    df: Optional[float] = None
    group: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", TermKind(self.kind))
        columns = (self.columns,) if isinstance(self.columns, str) else self.columns
        object.__setattr__(self, "columns", tuple(columns))
        if not self.term_id or ":" in self.term_id or self.term_id == INTERCEPT_ID:
            raise ConfigurationError(f"Invalid term id '{self.term_id}'.")
        if len(self.columns) != _N_COLUMNS[self.kind]:
            raise ConfigurationError(
                f"Term '{self.term_id}' of kind {self.kind.value} needs "
                f"{_N_COLUMNS[self.kind]} column(s), got {list(self.columns)}."
            )
        if (self.by is not None) != (self.kind == TermKind.INTERACTION):
            raise ConfigurationError(
                f"Term '{self.term_id}': exactly interaction terms name a modifier."
            )
        if self.df is not None and not self.df > 0:
            raise ConfigurationError(f"Term '{self.term_id}': df must be positive.")

    @property
    def display_label(self) -> str:
        return self.label if self.label is not None else self.term_id

    @property
    def referenced_columns(self) -> Tuple[str, ...]:
        return self.columns + (() if self.by is None else (self.by,))

    def to_dict(self) -> Dict[str, Any]:
        dictionary: Dict[str, Any] = {
            "id": self.term_id,
            "kind": self.kind.value,
            "columns": list(self.columns),
        }
        for key in ("label", "by", "by_level", "df", "group"):
            if getattr(self, key) is not None:
                dictionary[key] = getattr(self, key)
        return dictionary

    @classmethod
    def from_dict(cls, dictionary: Mapping[str, Any]) -> "TermSpec":
        try:
            return cls(
                term_id=dictionary["id"],
                kind=TermKind(dictionary["kind"]),
                columns=tuple(dictionary["columns"]),
                label=dictionary.get("label"),
                by=dictionary.get("by"),
                by_level=dictionary.get("by_level"),
                df=dictionary.get("df"),
                group=dictionary.get("group"),
            )
        except (KeyError, ValueError) as error:
            if isinstance(error, ConfigurationError):
                raise
            raise ConfigurationError(
                f"Invalid term declaration {dict(dictionary)}."
            ) from error


@dataclass(frozen=True)
class ModelFormula:
    """Ordered term list of the additive probit model.

    Args:
        outcome: binary categorical column; its non-reference level is coded 1.
        terms: model terms, in reporting order.
        inner_knots: inner knots of smooth and interaction terms.
        degree: spline degree of smooth and interaction terms.
        surface_inner_knots: inner knots per margin of surface and spatial terms.
        surface_degree: spline degree per margin of surface and spatial terms.
        df: degrees of freedom every penalized learner is calibrated to.
        intercept: whether an intercept learner competes in boosting.
    """

    outcome: str
    terms: Tuple[TermSpec, ...]
    inner_knots: int = 20
    degree: int = 3
    surface_inner_knots: int = 20
    surface_degree: int = 1
    df: float = 1.0
    intercept: bool = True

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        ids = [term.term_id for term in self.terms]
        duplicated = sorted({term_id for term_id in ids if ids.count(term_id) > 1})
        if duplicated:
            raise ConfigurationError(f"Duplicated term ids {duplicated}.")
        if not self.df > 0:
            raise ConfigurationError(f"Formula df must be positive, got {self.df}.")

    def term(self, term_id: str) -> TermSpec:
        for term in self.terms:
            if term.term_id == term_id:
                return term
        raise ConfigurationError(f"Unknown term '{term_id}'.")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "outcome": self.outcome,
            "terms": [term.to_dict() for term in self.terms],
            "inner_knots": self.inner_knots,
            "degree": self.degree,
            "surface_inner_knots": self.surface_inner_knots,
            "surface_degree": self.surface_degree,
            "df": self.df,
            "intercept": self.intercept,
        }

    @classmethod
    def from_dict(cls, dictionary: Mapping[str, Any]) -> "ModelFormula":
        if "outcome" not in dictionary:
            raise ConfigurationError("Formula names no outcome column.")
        return cls(
            outcome=dictionary["outcome"],
            terms=tuple(
                TermSpec.from_dict(term) for term in dictionary.get("terms", [])
            ),
            inner_knots=int(dictionary.get("inner_knots", 20)),
            degree=int(dictionary.get("degree", 3)),
            surface_inner_knots=int(dictionary.get("surface_inner_knots", 20)),
            surface_degree=int(dictionary.get("surface_degree", 1)),
            df=float(dictionary.get("df", 1.0)),
            intercept=bool(dictionary.get("intercept", True)),
        )


def outcome_vector(formula: ModelFormula, ds: Dataset) -> np.ndarray:
    """0/1 outcome; 1 marks the non-reference level of the outcome column.

    Raises:
        ConfigurationError: the outcome column isn't binary categorical.
        DataError: the outcome has missing values.
    """
    schema = ds.column_schema(formula.outcome)
    if schema.kind != ColumnKind.CATEGORICAL or len(schema.levels) != 2:
        raise ConfigurationError(
            f"Outcome '{formula.outcome}' must be a categorical column with 2 levels."
        )
    if ds.missing(formula.outcome).any():
        raise DataError(f"Outcome '{formula.outcome}' has missing values.")
    reference_code = schema.levels.index(schema.reference)
    return (ds.values(formula.outcome) != reference_code).astype(float)


def validate_formula(formula: ModelFormula, column_kinds: Mapping[str, ColumnKind]):
    """Check that every term references existing columns of suitable kinds."""
    for name in (formula.outcome,) + tuple(
        column for term in formula.terms for column in term.referenced_columns
    ):
        if name not in column_kinds:
            raise ConfigurationError(f"Formula references unknown column '{name}'.")
    for term in formula.terms:
        kinds = [column_kinds[name] for name in term.columns]
        if term.kind == TermKind.CATEGORICAL:
            expected: Tuple[ColumnKind, ...] = (ColumnKind.CATEGORICAL,)
        elif term.kind == TermKind.RANDOM:
            expected = _GROUPING_KINDS
        else:
            expected = _CONTINUOUS_KINDS
        if any(kind not in expected for kind in kinds):
            raise ConfigurationError(
                f"Term '{term.term_id}' of kind {term.kind.value} can't use columns "
                f"{list(term.columns)} of kinds {[kind.value for kind in kinds]}."
            )
        if term.by is not None and column_kinds[term.by] != ColumnKind.CATEGORICAL:
            raise ConfigurationError(
                f"Interaction '{term.term_id}' needs a categorical modifier, "
                f"'{term.by}' is {column_kinds[term.by].value}."
            )


def _modifier(term: TermSpec, ds: Dataset) -> Modifier:
    schema = ds.column_schema(term.by)
    level = term.by_level
    if level is None:
        if len(schema.levels) != 2:
            raise ConfigurationError(
                f"Interaction '{term.term_id}': modifier '{term.by}' has more than "
                "two levels, name the level with 'by_level'."
            )
        level = next(lvl for lvl in schema.levels if lvl != schema.reference)
    if level not in schema.levels:
        raise ConfigurationError(
            f"Interaction '{term.term_id}': '{level}' is not a level of '{term.by}'."
        )
    return Modifier(term.by, schema.levels, level)


class _TermBuilder:
    def __init__(self, formula: ModelFormula, ds: Dataset, w: np.ndarray):
        self.formula = formula
        self.ds = ds
        self.w = w

    def learner(self, learner_id, kind, penalty, encoder, term, df=None):
        design = encode(encoder, self.ds)
        learner = BaseLearner(
            learner_id=learner_id,
            kind=kind,
            penalty=penalty,
            encoder=encoder,
            design=design,
            term_id=term.term_id if term is not None else INTERCEPT_ID,
            term_label=term.display_label if term is not None else INTERCEPT_ID,
        )
        if df is None:
            return learner
        return learner.with_lambda(calibrate_lambda_for_df(learner, df, self.w), df)

    def term_df(self, term: TermSpec) -> float:
        return term.df if term.df is not None else self.formula.df

    def intercept(self) -> List[BaseLearner]:
        return [
            self.learner(
                INTERCEPT_ID,
                LearnerKind.INTERCEPT,
                zero_penalty(1),
                InterceptEncoder(),
                None,
            )
        ]

    def categorical(self, term: TermSpec) -> List[BaseLearner]:
        schema = self.ds.column_schema(term.columns[0])
        if len(schema.levels) < 2:
            raise ConfigurationError(f"Term '{term.term_id}' needs at least 2 levels.")
        encoder = DummyEncoder(schema.name, schema.levels, schema.reference)
        width = len(schema.levels) - 1
        if width <= _MAX_UNPENALIZED_DUMMIES:
            return [
                self.learner(
                    term.term_id,
                    LearnerKind.LINEAR_CATEGORICAL,
                    zero_penalty(width),
                    encoder,
                    term,
                )
            ]
        return [
            self.learner(
                term.term_id,
                LearnerKind.LINEAR_CATEGORICAL,
                ridge_penalty(width),
                encoder,
                term,
                self.term_df(term),
            )
        ]

    def linear(self, term: TermSpec) -> List[BaseLearner]:
        column = term.columns[0]
        x = self.ds.values(column)
        center = float(np.dot(self.w, x) / self.w.sum())
        encoder = LinearEncoder(column, center)
        return [
            self.learner(
                term.term_id, LearnerKind.LINEAR, zero_penalty(1), encoder, term
            )
        ]

    def decomposed(self, term: TermSpec, modifier: Optional[Modifier]):
        column = term.columns[0]
        x = self.ds.values(column)
        weights = self.w
        if modifier is not None:
            values = column_values(self.ds, [modifier.column])
            weights = self.w * modifier.indicator(values)
            if not np.any(weights > 0):
                raise DataError(
                    f"Interaction '{term.term_id}': no rows with level "
                    f"'{modifier.level}' of '{modifier.column}'."
                )
        grid = KnotGrid.from_data(x, self.formula.inner_knots, self.formula.degree)
        decomposed = decompose_pspline(
            bspline_design(x, grid),
            difference_penalty(grid.n_basis, 2),
            x,
            weights,
        )
        if modifier is None:
            kinds = (LearnerKind.SMOOTH_LINEAR, LearnerKind.SMOOTH_NONLINEAR)
        else:
            kinds = (
                LearnerKind.VARYING_COEFFICIENT_LINEAR,
                LearnerKind.VARYING_COEFFICIENT,
            )
        linear_encoder = LinearEncoder(column, decomposed.center, modifier)
        nonlinear_encoder = NonlinearEncoder(
            column,
            grid,
            decomposed.transform,
            decomposed.projection,
            decomposed.center,
            modifier,
        )
        width = decomposed.nonlinear_part.shape[1]
        return [
            self.learner(
                f"{term.term_id}:linear",
                kinds[0],
                zero_penalty(1),
                linear_encoder,
                term,
            ),
            self.learner(
                f"{term.term_id}:smooth",
                kinds[1],
                ridge_penalty(width),
                nonlinear_encoder,
                term,
                self.term_df(term),
            ),
        ]

    def tensor(self, term: TermSpec) -> List[BaseLearner]:
        first, second = term.columns
        grids = tuple(
            KnotGrid.from_data(
                self.ds.values(name),
                self.formula.surface_inner_knots,
                self.formula.surface_degree,
            )
            for name in term.columns
        )
        raw = row_tensor(
            bspline_design(self.ds.values(first), grids[0]),
            bspline_design(self.ds.values(second), grids[1]),
        )
        column_means = self.w @ raw / self.w.sum()
        size = raw.shape[1]
        kronecker = kronecker_sum_penalty(
            difference_penalty(grids[0].n_basis, 1),
            difference_penalty(grids[1].n_basis, 1),
        )
        # centered columns leave the constant direction to the level penalty
        penalty = PenaltyMatrix(kronecker.order, kronecker.matrix + 1.0 / size)
        kind = (
            LearnerKind.SPATIAL_SURFACE
            if term.kind == TermKind.SPATIAL
            else LearnerKind.TENSOR_SURFACE
        )
        encoder = TensorEncoder(first, second, grids, column_means)
        return [
            self.learner(term.term_id, kind, penalty, encoder, term, self.term_df(term))
        ]

    def random(self, term: TermSpec) -> List[BaseLearner]:
        column = term.columns[0]
        levels = self.ds.levels[column]
        encoder = RandomInterceptEncoder(column, tuple(levels))
        return [
            self.learner(
                term.term_id,
                LearnerKind.RANDOM_INTERCEPT,
                ridge_penalty(len(levels)),
                encoder,
                term,
                self.term_df(term),
            )
        ]

    def build(self, term: TermSpec) -> List[BaseLearner]:
        if term.kind == TermKind.CATEGORICAL:
            return self.categorical(term)
        if term.kind == TermKind.LINEAR:
            return self.linear(term)
        if term.kind == TermKind.SMOOTH:
            return self.decomposed(term, None)
        if term.kind == TermKind.INTERACTION:
            return self.decomposed(term, _modifier(term, self.ds))
        if term.kind in (TermKind.SURFACE, TermKind.SPATIAL):
            return self.tensor(term)
        return self.random(term)


def build_term_set(
    formula: ModelFormula, ds: Dataset, w: Optional[np.ndarray] = None
) -> List[BaseLearner]:
    """Base learners of every formula term, penalties calibrated to equal df.

    Learners: the intercept (if requested); a dummy block per categorical term;
    a centered linear learner per linear term; linear and nonlinear parts of
    every smooth and interaction term (ids "<term>:linear" and "<term>:smooth");
    a tensor product learner per surface or spatial term; a ridge learner per
    random intercept.

    Args:
        formula: model formula.
        ds: complete training data.
        w: observation weights, defaults to the survey weights of `ds`. They
            are normalized to mean 1 over positive entries.

    Raises:
        ConfigurationError: the formula references unknown columns, uses
            columns of unsuitable kinds or an interaction has a continuous
            modifier.
        DataError: a referenced column has missing values.
        DomainError: a term can't reach the requested degrees of freedom.
    """
    validate_formula(formula, {name: ds.kind(name) for name in ds.column_names})
    for term in formula.terms:
        column_values(ds, term.referenced_columns)
    w = normalize_weights(ds.weights if w is None else w)

    builder = _TermBuilder(formula, ds, w)
    learners = builder.intercept() if formula.intercept else []
    for term in formula.terms:
        learners.extend(builder.build(term))
    logger.info(
        "Built %d base learners for %d terms.", len(learners), len(formula.terms)
    )
    return learners
