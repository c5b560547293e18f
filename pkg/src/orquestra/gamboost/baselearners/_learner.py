################################################################################
# © Copyright 2022 Zapata Computing Inc.
################################################################################
"""Penalized least-squares base learners."""
import logging
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

import numpy as np
import scipy.linalg
import scipy.optimize

from ..basis import PenaltyMatrix
from ..data import Dataset
from ..errors import ConfigurationError, DomainError, NumericalError
from ._encoders import DesignEncoder, encode

logger = logging.getLogger(__name__)

DF_TOLERANCE = 1e-6

_PIVOT_RATIO = 1e-7
_LOG_LAMBDA_SPAN = 40.0


class LearnerKind(str, Enum):
    INTERCEPT = "intercept"
    LINEAR_CATEGORICAL = "linear-categorical"
    LINEAR = "linear"
    SMOOTH_LINEAR = "smooth-decomposed-linear"
    SMOOTH_NONLINEAR = "smooth-decomposed-nonlinear"
    VARYING_COEFFICIENT_LINEAR = "varying-coefficient-linear"
    VARYING_COEFFICIENT = "varying-coefficient"
    TENSOR_SURFACE = "tensor-surface"
    SPATIAL_SURFACE = "spatial-surface"
    RANDOM_INTERCEPT = "random-intercept"

    @property
    def is_parametric(self) -> bool:
        """Whether every coefficient is a reportable effect (coefficient tables)."""
        return self in (
            LearnerKind.LINEAR_CATEGORICAL,
            LearnerKind.LINEAR,
            LearnerKind.SMOOTH_LINEAR,
            LearnerKind.VARYING_COEFFICIENT_LINEAR,
        )


@dataclass(frozen=True, eq=False)
class BaseLearner:
    """One penalized least-squares component of the additive predictor.

    Args:
        learner_id: unique id, e.g. "age:smooth".
        kind: construction rule the learner comes from.
        penalty: penalty matrix K of the coefficients.
        encoder: rebuilds the design from data or evaluation grids.
        design: training design matrix. None for learners restored from a
            saved model, which can only be evaluated through the encoder.
        lam: penalty strength λ.
        df_target: effective degrees of freedom λ was calibrated to (None when
            the learner is unpenalized).
        term_id: id of the formula term the learner belongs to.
        term_label: human readable name of the term.
    """

    learner_id: str
    kind: LearnerKind
    penalty: PenaltyMatrix
    encoder: DesignEncoder
    design: Optional[np.ndarray] = None
    lam: float = 0.0
    df_target: Optional[float] = None
    term_id: str = ""
    term_label: str = ""

    def __post_init__(self):
        if not self.lam >= 0:
            raise ConfigurationError(
                f"Learner '{self.learner_id}': lambda must be non-negative, got "
                f"{self.lam}."
            )
        if self.design is not None and self.design.shape[1] != self.penalty.size:
            raise ValueError(
                f"Learner '{self.learner_id}': design has {self.design.shape[1]} "
                f"columns, penalty has {self.penalty.size}."
            )

    @property
    def n_coefficients(self) -> int:
        return self.penalty.size

    def training_design(self) -> np.ndarray:
        if self.design is None:
            raise ValueError(f"Learner '{self.learner_id}' has no training design.")
        return self.design

    def design_for(self, ds: Dataset) -> np.ndarray:
        return encode(self.encoder, ds)

    def with_lambda(self, lam: float, df_target: Optional[float] = None):
        return replace(self, lam=float(lam), df_target=df_target)

    def without_design(self) -> "BaseLearner":
        return replace(self, design=None)


@dataclass(frozen=True)
class FitResult:
    coefficients: np.ndarray
    fitted: np.ndarray
    weighted_rss: float


class PreparedLearner:
    """Base learner with the penalized system factorized for fixed weights.

    Fitting many responses against the same weights (one per boosting
    iteration) then costs two triangular solves each.

    Raises:
        NumericalError: XᵀWX + λK + ridge·I is singular.
    """

    def __init__(self, learner: BaseLearner, w: np.ndarray, ridge: float = 0.0):
        self.learner = learner
        self.w = np.asarray(w, dtype=float)
        self._design = learner.training_design()
        self._weighted = self._design * self.w[:, None]
        system = self._design.T @ self._weighted + learner.lam * learner.penalty.matrix
        if ridge:
            system = system + ridge * np.eye(learner.n_coefficients)
        try:
            self._factor = scipy.linalg.cho_factor(system, lower=True)
        except (scipy.linalg.LinAlgError, ValueError) as error:
            raise NumericalError(
                f"Learner '{learner.learner_id}': penalized system is singular."
            ) from error
        pivots = np.abs(np.diag(self._factor[0]))
        if pivots.min() <= _PIVOT_RATIO * pivots.max():
            raise NumericalError(
                f"Learner '{learner.learner_id}': penalized system is singular."
            )

    def fit(self, u: np.ndarray) -> FitResult:
        coefficients = scipy.linalg.cho_solve(self._factor, self._weighted.T @ u)
        if not np.all(np.isfinite(coefficients)):
            raise NumericalError(
                f"Learner '{self.learner.learner_id}': non-finite coefficients."
            )
        fitted = self._design @ coefficients
        residual = u - fitted
        return FitResult(coefficients, fitted, float(np.dot(self.w, residual**2)))


def fit_penalized_ls(
    bl: BaseLearner, u: np.ndarray, w: np.ndarray, ridge: float = 0.0
) -> FitResult:
    """Coefficients (XᵀWX + λK)⁻¹XᵀWu of a base learner.

    Args:
        bl: learner with a training design.
        u: response, typically the negative gradient.
        w: observation weights.
        ridge: optional jitter added to the diagonal of the system.

    Raises:
        NumericalError: the system is singular (e.g. rank-deficient design at
            λ = 0); retrying with ridge = 1e-10 usually helps.
    """
    return PreparedLearner(bl, w, ridge).fit(np.asarray(u, dtype=float))


def effective_df(bl: BaseLearner, w: np.ndarray, lam: Optional[float] = None) -> float:
    """Trace of the hat matrix X(XᵀWX + λK)⁻¹XᵀW."""
    lam = bl.lam if lam is None else lam
    design = bl.training_design()
    gram = design.T @ (design * np.asarray(w, dtype=float)[:, None])
    if lam == 0:
        return float(np.linalg.matrix_rank(gram, hermitian=True))
    return float(np.trace(np.linalg.solve(gram + lam * bl.penalty.matrix, gram)))


def _df_curve(bl: BaseLearner, w: np.ndarray):
    """df(λ), the attainable range (lowest, highest) and a λ scale."""
    design = bl.training_design()
    gram = design.T @ (design * np.asarray(w, dtype=float)[:, None])
    penalty = bl.penalty.matrix
    try:
        root = np.linalg.cholesky(penalty)
    except np.linalg.LinAlgError:
        root = None

    if root is not None:
        whitened = scipy.linalg.solve_triangular(root, gram, lower=True)
        whitened = scipy.linalg.solve_triangular(root, whitened.T, lower=True)
        eigenvalues = np.clip(scipy.linalg.eigvalsh(whitened), 0.0, None)
        largest = max(float(eigenvalues.max()), np.finfo(float).tiny)
        rank = int(np.sum(eigenvalues > 1e-10 * largest))

        def df(lam):
            return float(np.sum(eigenvalues / (eigenvalues + lam)))

        return df, (0.0, float(rank)), largest

    def df(lam):
        return float(np.trace(np.linalg.solve(gram + lam * penalty, gram)))

    rank = float(np.linalg.matrix_rank(gram, hermitian=True))
    null_dim = float(bl.penalty.null_space_dimension())
    scale = max(float(np.trace(gram)) / max(float(np.trace(penalty)), 1e-300), 1e-300)
    return df, (null_dim, rank), scale


def calibrate_lambda_for_df(bl: BaseLearner, df_target: float, w: np.ndarray) -> float:
    """Penalty strength λ at which the learner has `df_target` degrees of freedom.

    Found by bisection on log λ; the resulting hat-matrix trace matches
    `df_target` within 1e-6.

    Raises:
        DomainError: `df_target` is outside of (null space dimension, rank(X)].
    """
    df, (lowest, highest), scale = _df_curve(bl, w)
    if not lowest < df_target <= highest + DF_TOLERANCE:
        raise DomainError(
            f"Learner '{bl.learner_id}': df {df_target} is not attainable, "
            f"attainable range is ({lowest:g}, {highest:g}]."
        )
    low = np.log(scale) - _LOG_LAMBDA_SPAN
    high = np.log(scale) + _LOG_LAMBDA_SPAN
    if df(np.exp(low)) <= df_target:
        return 0.0

    def excess(log_lam):
        return df(np.exp(log_lam)) - df_target

    log_lam = scipy.optimize.bisect(excess, low, high, xtol=1e-12, maxiter=500)
    lam = float(np.exp(log_lam))
    logger.debug("Learner '%s': lambda %.6g for df %g", bl.learner_id, lam, df_target)
    return lam
