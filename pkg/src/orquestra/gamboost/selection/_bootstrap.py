################################################################################
# © Copyright 2022 Zapata Computing Inc.
################################################################################
"""Pointwise bootstrap confidence bands of partial effects."""
import logging
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed

from ..baselearners import INTERCEPT_ID, BaseLearner, ModelFormula, outcome_vector
from ..boosting import (
    OFFSET_KEY,
    FittedModel,
    PartialEffect,
    boost,
    fit,
    grid_values,
    term_contribution,
)
from ..boosting._effects import Grid
from ..data import Dataset
from ..errors import ConfigurationError
from ..typing import DumpTarget
from ..utils import RNDSEED, ensure_open
from ._plans import bootstrap_counts

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class BootstrapRun:
    """Coefficients of the models refitted on bootstrap samples.

    `intercepts[b]` is offset plus intercept coefficient of replicate b.
    """

    coefficients: Tuple[Mapping[str, np.ndarray], ...]
    intercepts: np.ndarray
    m_stop: int

    @property
    def n_replicates(self) -> int:
        return len(self.coefficients)


def _quantile_limits(samples: np.ndarray, level: float):
    if not 0 < level < 1:
        raise ConfigurationError(f"Confidence level must be in (0, 1), got {level}.")
    tail = (1 - level) / 2
    lower, upper = np.quantile(samples, [tail, 1 - tail], axis=0, method="linear")
    return lower, upper


def _refit(learners, y, w, counts, nu, m_stop):
    path = boost(learners, y, w * counts, nu=nu, m_stop=m_stop)
    coefficients = path.coefficients
    intercept = path.state.offset
    if INTERCEPT_ID in coefficients:
        intercept += float(coefficients[INTERCEPT_ID][0])
    return coefficients, intercept


def run_bootstrap(
    model: FittedModel,
    ds: Dataset,
    n_replicates: int = 1000,
    seed: int = RNDSEED,
    stratify_by_outcome: bool = True,
    n_jobs: int = 1,
) -> BootstrapRun:
    """Refit the model's learners at its m_stop on n-row bootstrap samples.

    Rows are drawn with replacement and enter the fit with their survey weight
    times their multiplicity. Penalties stay as calibrated on the full data.

    Args:
        model: model fitted on `ds` (its learners carry training designs).
        ds: the training data.
        n_replicates: number of bootstrap samples.
        seed: base seed; replicate b uses a seed derived from (seed, b).
        stratify_by_outcome: keep the outcome class counts of every sample.
        n_jobs: joblib workers; results don't depend on it.
    """
    y = outcome_vector(model.formula, ds)
    w = ds.weights
    counts = [
        bootstrap_counts(y, w, seed, replicate, stratify_by_outcome)
        for replicate in range(n_replicates)
    ]
    refits = Parallel(n_jobs=n_jobs)(
        delayed(_refit)(model.learners, y, w, count, model.nu, model.m_stop)
        for count in counts
    )
    logger.info("Refitted %d bootstrap replicates.", n_replicates)
    return BootstrapRun(
        tuple(coefficients for coefficients, _ in refits),
        np.array([intercept for _, intercept in refits]),
        model.m_stop,
    )


def coefficient_bands(
    run: BootstrapRun, level: float = 0.95
) -> Dict[str, Tuple[np.ndarray, np.ndarray]]:
    """Percentile limits of every coefficient, plus the intercept under
    `OFFSET_KEY`."""
    bands = {OFFSET_KEY: _quantile_limits(run.intercepts[:, None], level)}
    for learner_id in run.coefficients[0]:
        samples = np.vstack([replicate[learner_id] for replicate in run.coefficients])
        bands[learner_id] = _quantile_limits(samples, level)
    return bands


def effect_bands(
    model: FittedModel,
    run: BootstrapRun,
    term_ids: Sequence[str],
    grids: Optional[Mapping[str, Grid]] = None,
    level: float = 0.95,
) -> List[PartialEffect]:
    """Full-data partial effects with pointwise percentile bands."""
    grids = grids or {}
    effects = []
    for term_id in term_ids:
        term = model.formula.term(term_id)
        grid, values = grid_values(model, term_id, grids.get(term_id))
        estimate = term_contribution(model, term_id, values, len(grid))
        replicates = np.vstack(
            [
                term_contribution(model, term_id, values, len(grid), coefficients)
                for coefficients in run.coefficients
            ]
        )
        lower, upper = _quantile_limits(replicates, level)
        effects.append(
            PartialEffect(
                term_id,
                term.display_label,
                term.columns,
                grid,
                estimate,
                lower,
                upper,
                level,
            )
        )
    return effects


def default_band_terms(
    model: FittedModel, stable_learners: Optional[Sequence[str]] = None
) -> List[str]:
    """Terms of the stable learners, or every term when none is given."""
    if stable_learners:
        stable_terms = {model.learner(i).term_id for i in stable_learners}
        return [t.term_id for t in model.formula.terms if t.term_id in stable_terms]
    return [term.term_id for term in model.formula.terms]


def bootstrap_bands(
    formula: ModelFormula,
    ds: Dataset,
    m_star: int,
    n_replicates: int = 1000,
    level: float = 0.95,
    grids: Optional[Mapping[str, Grid]] = None,
    term_ids: Optional[Sequence[str]] = None,
    nu: float = 0.5,
    seed: int = RNDSEED,
    stratify_by_outcome: bool = True,
    learners: Optional[Sequence[BaseLearner]] = None,
    n_jobs: int = 1,
) -> List[PartialEffect]:
    """Partial effects of the full-data fit at m_star with bootstrap bands.

    Args:
        formula: model formula.
        ds: complete training data.
        m_star: tuned number of iterations.
        n_replicates: number of bootstrap samples.
        level: pointwise confidence level.
        grids: term id -> grid; default grids otherwise.
        term_ids: terms to report, all terms by default.
        nu: shrinkage.
        seed: base seed of the bootstrap draws.
        stratify_by_outcome: keep the outcome class counts of every sample.
        learners: prebuilt learners of `formula` on `ds`.
        n_jobs: joblib workers.
    """
    model = fit(formula, ds, nu=nu, m_stop=m_star, learners=learners)
    run = run_bootstrap(model, ds, n_replicates, seed, stratify_by_outcome, n_jobs)
    if term_ids is None:
        term_ids = default_band_terms(model)
    return effect_bands(model, run, term_ids, grids, level)


def save_partial_effect(effect: PartialEffect, filename: DumpTarget) -> None:
    with ensure_open(filename, "w") as f:
        effect.to_frame().to_csv(f, index=False, lineterminator="\n")
