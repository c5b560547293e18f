################################################################################
# © Copyright 2022 Zapata Computing Inc.
################################################################################
"""Component-wise functional gradient descent over a set of base learners."""
import logging
from dataclasses import dataclass, replace
from typing import Callable, Dict, List, Mapping, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from ..baselearners import INTERCEPT_ID, BaseLearner, PreparedLearner
from ..errors import ConfigurationError, NumericalError
from ..typing import RealVector
from ..utils import normalize_weights
from ._loss import ProbitLoss

logger = logging.getLogger(__name__)

MONOTONE_TOLERANCE = 1e-10


class HistoryEntry(NamedTuple):
    iteration: int
    learner_id: str
    weighted_rss: float


@dataclass(frozen=True, eq=False)
class BoostState:
    """Additive predictor after `iteration` boosting steps.

    `coef_store` holds, per learner id, the sum of the ν-scaled coefficient
    increments, hence eta = offset + Σ design · coef_store.
    """

    eta: np.ndarray
    iteration: int
    history: Tuple[HistoryEntry, ...]
    coef_store: Mapping[str, np.ndarray]
    nu: float
    offset: float

    @classmethod
    def initial(
        cls, learners: Sequence[BaseLearner], n_rows: int, offset: float, nu: float
    ) -> "BoostState":
        if not 0 < nu <= 1:
            raise ConfigurationError(f"Shrinkage nu must be in (0, 1], got {nu}.")
        return cls(
            eta=np.full(n_rows, float(offset)),
            iteration=0,
            history=(),
            coef_store={
                learner.learner_id: np.zeros(learner.n_coefficients)
                for learner in learners
            },
            nu=float(nu),
            offset=float(offset),
        )

    @property
    def selected_ids(self) -> List[str]:
        """Distinct selected learner ids, in order of first selection."""
        return list(dict.fromkeys(entry.learner_id for entry in self.history))


def prepare_learners(
    learners: Sequence[BaseLearner], w: np.ndarray
) -> List[PreparedLearner]:
    """Factorize every learner for the given fit weights.

    Learners whose penalized system is singular under `w` (e.g. a level that
    is absent from a subsample, at λ = 0) can't compete and are left out with
    a warning.

    Raises:
        NumericalError: no learner can be fitted.
    """
    prepared = []
    for learner in learners:
        try:
            prepared.append(PreparedLearner(learner, w))
        except NumericalError as error:
            logger.warning("Excluded learner '%s': %s", learner.learner_id, error)
    if not prepared:
        raise NumericalError("No base learner can be fitted with these weights.")
    return prepared


def boost_step(
    state: BoostState,
    prepared: Sequence[PreparedLearner],
    y: np.ndarray,
    loss: ProbitLoss = ProbitLoss(),
) -> BoostState:
    """One boosting iteration.

    Every learner is fitted to the negative gradient at the current predictor;
    the one with the smallest weighted residual sum of squares (first one on
    ties) is added, scaled by ν.

    Fit weights are those the learners were prepared with.

    Raises:
        NumericalError: every learner fit failed.
    """
    u = loss.negative_gradient(y, state.eta)
    best = None
    for index, learner in enumerate(prepared):
        try:
            result = learner.fit(u)
        except NumericalError as error:
            logger.warning(
                "Iteration %d: learner '%s' excluded: %s",
                state.iteration + 1,
                learner.learner.learner_id,
                error,
            )
            continue
        if best is None or result.weighted_rss < best[1].weighted_rss:
            best = (index, result)
    if best is None:
        raise NumericalError(f"Iteration {state.iteration + 1}: every fit failed.")

    learner_id = prepared[best[0]].learner.learner_id
    result = best[1]
    coef_store = dict(state.coef_store)
    coef_store[learner_id] = coef_store[learner_id] + state.nu * result.coefficients
    iteration = state.iteration + 1
    logger.debug(
        "Iteration %d: selected '%s' (weighted RSS %.6g)",
        iteration,
        learner_id,
        result.weighted_rss,
    )
    return replace(
        state,
        eta=state.eta + state.nu * result.fitted,
        iteration=iteration,
        history=state.history
        + (HistoryEntry(iteration, learner_id, result.weighted_rss),),
        coef_store=coef_store,
    )


@dataclass(frozen=True, eq=False)
class BoostPath:
    """Outcome of a boosting run.

    `risk[m]` is the weighted training risk after m iterations. `eval_risk[m]`
    is the weighted mean risk over the evaluation rows, when requested.
    """

    state: BoostState
    risk: np.ndarray
    eval_risk: Optional[np.ndarray] = None

    @property
    def coefficients(self) -> Dict[str, np.ndarray]:
        return dict(self.state.coef_store)


def boost(
    learners: Sequence[BaseLearner],
    y: RealVector,
    w: RealVector,
    nu: float = 0.5,
    m_stop: int = 100,
    eval_weights: Optional[RealVector] = None,
    stop_when: Optional[Callable[[BoostState], bool]] = None,
    check_monotone: bool = False,
    loss: ProbitLoss = ProbitLoss(),
) -> BoostPath:
    """Run up to `m_stop` boosting iterations from the optimal constant.

    Resampled fits are expressed through weights: rows outside of a subsample
    get weight 0, bootstrap rows are weighted by their multiplicity. Fits use
    the weights rescaled to mean 1 over positive entries, so scaling `w`
    changes neither the selections nor the coefficients.

    Args:
        learners: base learners with training designs covering all rows.
        y: 0/1 outcome.
        w: fit weights.
        nu: shrinkage in (0, 1].
        m_stop: number of iterations.
        eval_weights: weights of held-out rows; their weighted mean risk is
            recorded after every iteration.
        stop_when: predicate on the state, checked before each iteration;
            boosting ends early once it holds.
        check_monotone: raise instead of logging when the training risk
            increases.
        loss: loss function.

    Raises:
        ConfigurationError: invalid `nu` or `m_stop`.
        DomainError: the weighted outcome has a single class.
        NumericalError: no learner can be fitted, or the risk increased with
            `check_monotone` set.
    """
    if m_stop < 0:
        raise ConfigurationError(f"m_stop must be non-negative, got {m_stop}.")
    y = np.asarray(y, dtype=float)
    w = np.asarray(w, dtype=float)
    fit_weights = normalize_weights(w)
    offset = loss.offset(y, w)
    state = BoostState.initial(learners, len(y), offset, nu)
    prepared = prepare_learners(learners, fit_weights) if m_stop else []

    if eval_weights is not None:
        eval_weights = np.asarray(eval_weights, dtype=float)
        eval_path = [loss.risk(y, state.eta, eval_weights) / eval_weights.sum()]
    risk_path = [loss.risk(y, state.eta, w)]

    for _ in range(m_stop):
        if stop_when is not None and stop_when(state):
            break
        state = boost_step(state, prepared, y, loss)
        risk_path.append(loss.risk(y, state.eta, w))
        if eval_weights is not None:
            eval_path.append(loss.risk(y, state.eta, eval_weights) / eval_weights.sum())
        if risk_path[-1] > risk_path[-2] + MONOTONE_TOLERANCE:
            message = (
                f"Training risk increased at iteration {state.iteration} from "
                f"{risk_path[-2]!r} to {risk_path[-1]!r} (learner "
                f"'{state.history[-1].learner_id}')."
            )
            if check_monotone:
                raise NumericalError(message)
            logger.warning(message)

    logger.info(
        "Boosting finished after %d iterations, %d distinct learners selected.",
        state.iteration,
        len([i for i in state.selected_ids if i != INTERCEPT_ID]),
    )
    return BoostPath(
        state,
        np.array(risk_path),
        np.array(eval_path) if eval_weights is not None else None,
    )
