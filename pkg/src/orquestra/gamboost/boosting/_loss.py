################################################################################
# © Copyright 2022 Zapata Computing Inc.
################################################################################
"""Probit negative log-likelihood and its functional gradient."""
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.special

from ..errors import DomainError
from ..typing import RealVector

ETA_BOUND = 30.0
LOG_FLOOR = np.log(1e-300)
_LOG_SQRT_2PI = 0.5 * np.log(2 * np.pi)


def _clipped(eta: RealVector) -> np.ndarray:
    return np.clip(np.asarray(eta, dtype=float), -ETA_BOUND, ETA_BOUND)


def _log_pdf(eta: np.ndarray) -> np.ndarray:
    return -0.5 * eta**2 - _LOG_SQRT_2PI


def probit_loss(y: RealVector, eta: RealVector) -> np.ndarray:
    """Per-row loss -[y log Φ(η) + (1 - y) log(1 - Φ(η))]."""
    y = np.asarray(y, dtype=float)
    eta = _clipped(eta)
    log_cdf = np.maximum(scipy.special.log_ndtr(eta), LOG_FLOOR)
    log_sf = np.maximum(scipy.special.log_ndtr(-eta), LOG_FLOOR)
    return -(y * log_cdf + (1 - y) * log_sf)


def probit_risk(
    y: RealVector, eta: RealVector, w: Optional[RealVector] = None
) -> float:
    """Weighted probit negative log-likelihood Σ w_i ℓ(y_i, η_i).

    Log-probabilities are evaluated with `scipy.special.log_ndtr`, which stays
    accurate deep in the tails, and floored at log(1e-300).
    """
    loss = probit_loss(y, eta)
    if w is None:
        return float(loss.sum())
    return float(np.dot(np.asarray(w, dtype=float), loss))


def negative_gradient(y: RealVector, eta: RealVector) -> np.ndarray:
    """u_i = y_i φ(η_i)/Φ(η_i) - (1 - y_i) φ(η_i)/(1 - Φ(η_i)).

    Both Mills ratios are computed in log space.
    """
    y = np.asarray(y, dtype=float)
    eta = _clipped(eta)
    log_pdf = _log_pdf(eta)
    upper = np.exp(log_pdf - scipy.special.log_ndtr(eta))
    lower = np.exp(log_pdf - scipy.special.log_ndtr(-eta))
    return y * upper - (1 - y) * lower


def fisher_weights(eta: RealVector) -> np.ndarray:
    """Expected information φ(η)² / (Φ(η)(1 - Φ(η))) of one observation."""
    eta = _clipped(eta)
    log_pdf = _log_pdf(eta)
    return np.exp(
        2 * log_pdf - scipy.special.log_ndtr(eta) - scipy.special.log_ndtr(-eta)
    )


def offset_init(y: RealVector, w: Optional[RealVector] = None) -> float:
    """Risk-minimizing constant predictor Φ⁻¹(weighted mean of y).

    Raises:
        DomainError: the weighted outcome is all 0 or all 1.
    """
    y = np.asarray(y, dtype=float)
    w = np.ones_like(y) if w is None else np.asarray(w, dtype=float)
    mean = float(np.dot(w, y) / w.sum())
    if not 0 < mean < 1:
        raise DomainError(
            f"Outcome is degenerate (weighted mean {mean}); both classes are needed."
        )
    return float(scipy.special.ndtri(mean))


@dataclass(frozen=True)
class ProbitLoss:
    """Probit link loss, as used by the boosting engine.

    The engine only talks to the loss through these methods, which is the
    hook for other binary links.
    """

    name: str = "probit"

    def risk(self, y, eta, w=None) -> float:
        return probit_risk(y, eta, w)

    def negative_gradient(self, y, eta) -> np.ndarray:
        return negative_gradient(y, eta)

    def offset(self, y, w=None) -> float:
        return offset_init(y, w)

    def response(self, eta) -> np.ndarray:
        return scipy.special.ndtr(_clipped(eta))
