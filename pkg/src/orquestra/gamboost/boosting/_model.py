################################################################################
# © Copyright 2022 Zapata Computing Inc.
################################################################################
import logging
from dataclasses import dataclass, replace
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..baselearners import (
    INTERCEPT_ID,
    BaseLearner,
    LinearEncoder,
    ModelFormula,
    NonlinearEncoder,
    build_term_set,
    outcome_vector,
)
from ..data import ColumnKind, Dataset
from ..errors import ConfigurationError
from ._engine import HistoryEntry, boost
from ._loss import ProbitLoss

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class FittedModel:
    """Additive probit model after m_stop boosting iterations.

    Args:
        formula: formula the learners were built from.
        learners: all base learners, selected or not.
        coefficients: accumulated coefficients per learner id.
        offset: constant the boosting started from.
        m_stop: number of iterations.
        nu: shrinkage.
        centers: centers of the covariates of linear and smooth learners.
        ranges: training (min, max) of the continuous covariates.
        risk: training risk after each iteration, m_stop + 1 entries.
        history: selected learner per iteration.
        eta: training predictor, None for models loaded from file.
    """

    formula: ModelFormula
    learners: Tuple[BaseLearner, ...]
    coefficients: Mapping[str, np.ndarray]
    offset: float
    m_stop: int
    nu: float
    centers: Mapping[str, float]
    ranges: Mapping[str, Tuple[float, float]]
    risk: np.ndarray
    history: Tuple[HistoryEntry, ...]
    eta: Optional[np.ndarray] = None

    def learner(self, learner_id: str) -> BaseLearner:
        for learner in self.learners:
            if learner.learner_id == learner_id:
                return learner
        raise ConfigurationError(f"Model has no learner '{learner_id}'.")

    def term_learners(self, term_id: str) -> List[BaseLearner]:
        self.formula.term(term_id)
        return [learner for learner in self.learners if learner.term_id == term_id]

    @property
    def selected_ids(self) -> List[str]:
        """Selected learner ids in learner order."""
        chosen = {entry.learner_id for entry in self.history}
        return [
            learner.learner_id
            for learner in self.learners
            if learner.learner_id in chosen
        ]

    @property
    def intercept(self) -> float:
        """Offset plus the coefficient of the intercept learner."""
        extra = self.coefficients.get(INTERCEPT_ID)
        return self.offset + (float(extra[0]) if extra is not None else 0.0)


def _centers(learners: Sequence[BaseLearner]) -> Dict[str, float]:
    centers = {}
    for learner in learners:
        encoder = learner.encoder
        if isinstance(encoder, (LinearEncoder, NonlinearEncoder)):
            centers.setdefault(encoder.column, float(encoder.center))
    return centers


def _ranges(formula: ModelFormula, ds: Dataset) -> Dict[str, Tuple[float, float]]:
    ranges = {}
    for term in formula.terms:
        for name in term.columns:
            if ds.kind(name) in (ColumnKind.CONTINUOUS, ColumnKind.COORDINATE):
                values = ds.values(name)
                ranges[name] = (float(values.min()), float(values.max()))
    return ranges


def linear_predictor(
    model: FittedModel,
    ds: Dataset,
    coefficients: Optional[Mapping[str, np.ndarray]] = None,
) -> np.ndarray:
    """Additive predictor η of every row of `ds`.

    Args:
        model: fitted model.
        ds: data with the covariates the selected learners use.
        coefficients: replaces the model coefficients, e.g. those of a
            bootstrap replicate.

    Raises:
        DataError: a used covariate has missing values or an unseen level.
    """
    coefficients = model.coefficients if coefficients is None else coefficients
    eta = np.full(ds.n_rows, model.offset)
    for learner in model.learners:
        coefficient = coefficients.get(learner.learner_id)
        if coefficient is None or not np.any(coefficient):
            continue
        eta = eta + learner.design_for(ds) @ coefficient
    return eta


def predict(
    model: FittedModel, ds: Dataset, loss: ProbitLoss = ProbitLoss()
) -> np.ndarray:
    """Probabilities Φ(η) of the non-reference outcome level, through the
    response of `loss` (η clipped to ±ETA_BOUND)."""
    return loss.response(linear_predictor(model, ds))


def fit(
    formula: ModelFormula,
    ds: Dataset,
    nu: float = 0.5,
    m_stop: int = 100,
    learners: Optional[Sequence[BaseLearner]] = None,
    check_monotone: bool = False,
) -> FittedModel:
    """Fit the additive probit model by m_stop boosting iterations.

    Args:
        formula: model formula.
        ds: complete training data; its weight column (if any) gives the
            survey weights.
        nu: shrinkage in (0, 1].
        m_stop: number of iterations.
        learners: prebuilt learners of `formula` on `ds`; built when omitted.
        check_monotone: raise if the training risk ever increases.

    Raises:
        ConfigurationError: invalid formula or hyperparameters.
        DataError: missing values in used columns.
        DomainError: degenerate outcome or unattainable degrees of freedom.
        NumericalError: see `boost`.
    """
    y = outcome_vector(formula, ds)
    if learners is None:
        learners = build_term_set(formula, ds)
    path = boost(
        learners, y, ds.weights, nu=nu, m_stop=m_stop, check_monotone=check_monotone
    )
    model = FittedModel(
        formula=formula,
        learners=tuple(learners),
        coefficients=path.coefficients,
        offset=path.state.offset,
        m_stop=path.state.iteration,
        nu=nu,
        centers=_centers(learners),
        ranges=_ranges(formula, ds),
        risk=path.risk,
        history=path.state.history,
    )
    eta = linear_predictor(model, ds)
    logger.info(
        "Fitted %d iterations; learners selected: %s",
        model.m_stop,
        ", ".join(model.selected_ids) or "none",
    )
    return replace(model, eta=eta)
