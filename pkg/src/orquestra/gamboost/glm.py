################################################################################
# © Copyright 2022 Zapata Computing Inc.
################################################################################
"""Weighted probit GLM fitted by iteratively reweighted least squares."""
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import scipy.linalg
import scipy.stats

from .baselearners import INTERCEPT_ID, outcome_vector
from .boosting import (
    FittedModel,
    coefficient_rows,
    fisher_weights,
    negative_gradient,
    probit_risk,
)
from .data import Dataset
from .errors import NumericalError
from .typing import DumpTarget
from .utils import ensure_open, normalize_weights

logger = logging.getLogger(__name__)

GRADIENT_TOLERANCE = 1e-8
MAX_ITERATIONS = 100


@dataclass(frozen=True, eq=False)
class GlmResult:
    names: Tuple[str, ...]
    estimates: np.ndarray
    std_errors: np.ndarray
    z_values: np.ndarray
    p_values: np.ndarray
    n_iterations: int
    gradient_norm: float

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "term": list(self.names),
                "estimate": self.estimates,
                "std_error": self.std_errors,
                "z_value": self.z_values,
                "p_value": self.p_values,
            }
        )


def _score_and_information(X, y, w, beta):
    eta = X @ beta
    score = X.T @ (w * negative_gradient(y, eta))
    information = X.T @ (X * (w * fisher_weights(eta))[:, None])
    return score, information


def fit_probit_glm(
    X: np.ndarray,
    y: np.ndarray,
    w: Optional[np.ndarray] = None,
    names: Optional[Sequence[str]] = None,
    max_iterations: int = MAX_ITERATIONS,
) -> GlmResult:
    """Weighted probit maximum likelihood by Fisher scoring.

    Steps that increase the weighted risk are halved. Standard errors come
    from the inverse expected information; p-values are two-sided normal.

    Args:
        X: design matrix with full column rank (include an intercept column).
        y: 0/1 outcome.
        w: observation weights, ones by default.
        names: column names, "x0", "x1", ... by default.
        max_iterations: iteration limit.

    Raises:
        NumericalError: the design is rank deficient, or the score norm is
            still above 1e-8 after `max_iterations` iterations.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    w = np.ones(len(y)) if w is None else np.asarray(w, dtype=float)
    if names is None:
        names = [f"x{i}" for i in range(X.shape[1])]
    names = tuple(names)

    if np.linalg.matrix_rank(X) < X.shape[1]:
        raise NumericalError(
            f"Probit GLM: design of {X.shape[1]} columns is rank deficient."
        )
    beta = np.zeros(X.shape[1])
    risk = probit_risk(y, X @ beta, w)
    for iteration in range(1, max_iterations + 1):
        score, information = _score_and_information(X, y, w, beta)
        try:
            step = scipy.linalg.solve(information, score, assume_a="pos")
        except (scipy.linalg.LinAlgError, ValueError) as error:
            raise NumericalError(
                "Probit GLM: information matrix is singular."
            ) from error
        for _ in range(50):
            candidate = beta + step
            candidate_risk = probit_risk(y, X @ candidate, w)
            if candidate_risk <= risk + 1e-12 * max(abs(risk), 1.0):
                break
            step = step / 2
        beta, risk = candidate, candidate_risk
        score, information = _score_and_information(X, y, w, beta)
        gradient_norm = float(np.linalg.norm(score))
        if gradient_norm < GRADIENT_TOLERANCE:
            break
    else:
        raise NumericalError(
            f"Probit GLM did not converge in {max_iterations} iterations; "
            f"final gradient norm {gradient_norm:.3g}."
        )

    covariance = scipy.linalg.inv(information)
    std_errors = np.sqrt(np.diag(covariance))
    z_values = beta / std_errors
    p_values = 2 * scipy.stats.norm.sf(np.abs(z_values))
    logger.info(
        "Probit GLM converged in %d iterations (gradient norm %.3g).",
        iteration,
        gradient_norm,
    )
    return GlmResult(
        names, beta, std_errors, z_values, p_values, iteration, gradient_norm
    )


def parametric_design(
    model: FittedModel, ds: Dataset, learner_ids: Optional[Sequence[str]] = None
) -> Tuple[np.ndarray, List[str]]:
    """Intercept column and the columns of the parametric learners.

    Columns are named like the rows of the coefficient table. Smooth, surface
    and random-intercept learners have no GLM counterpart and are skipped.

    Args:
        model: fitted model providing learners and labels.
        ds: data the design is built from.
        learner_ids: learners to include, the selected ones by default.
    """
    chosen = set(model.selected_ids if learner_ids is None else learner_ids)
    columns = [np.ones(ds.n_rows)]
    names = ["(Intercept)"]
    for learner in model.learners:
        if learner.learner_id == INTERCEPT_ID or learner.learner_id not in chosen:
            continue
        if not learner.kind.is_parametric:
            logger.info(
                "Learner '%s' is not parametric, left out of the GLM.",
                learner.learner_id,
            )
            continue
        design = learner.design_for(ds)
        for _, factor, index in coefficient_rows(model, learner):
            columns.append(design[:, index])
            names.append(factor)
    return np.column_stack(columns), names


def fit_learner_glm(
    model: FittedModel, ds: Dataset, learner_ids: Optional[Sequence[str]] = None
) -> GlmResult:
    """Unpenalized probit GLM on the parametric learners of a boosted model.

    Survey weights are rescaled to mean 1.

    Raises:
        ConfigurationError: unknown learner id.
        NumericalError: see `fit_probit_glm`.
    """
    for learner_id in learner_ids or ():
        model.learner(learner_id)
    X, names = parametric_design(model, ds, learner_ids)
    y = outcome_vector(model.formula, ds)
    return fit_probit_glm(X, y, normalize_weights(ds.weights), names)


def save_glm_table(result: GlmResult, filename: DumpTarget) -> None:
    with ensure_open(filename, "w") as f:
        result.to_frame().to_csv(f, index=False, lineterminator="\n")
