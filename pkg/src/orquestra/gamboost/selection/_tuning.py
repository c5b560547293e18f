################################################################################
# © Copyright 2022 Zapata Computing Inc.
################################################################################
"""Choice of the number of boosting iterations by subsampling."""
import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from ..baselearners import BaseLearner, ModelFormula, build_term_set, outcome_vector
from ..boosting import boost
from ..data import Dataset
from ..errors import ConfigurationError
from ..typing import DumpTarget, LoadSource
from ..utils import ensure_open, load_json, save_generic_dict
from ._plans import ResamplePlan, subsample_mask

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class TuningResult:
    """Out-of-sample risk curves of the replicates of a resample plan.

    `curves[r, m]` is the weighted mean risk of the rows left out of
    replicate r after m iterations.
    """

    m_star: int
    curves: np.ndarray
    train_masks: Sequence[np.ndarray]
    plan: ResamplePlan

    @property
    def mean_curve(self) -> np.ndarray:
        return self.curves.mean(axis=0)

    @property
    def m_max(self) -> int:
        return self.curves.shape[1] - 1

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(
            {"m": np.arange(self.m_max + 1), "mean_risk": self.mean_curve}
        )
        for replicate, curve in enumerate(self.curves):
            frame[f"replicate_{replicate + 1}"] = curve
        return frame


def _held_out_curve(learners, y, w, mask, nu, m_max) -> np.ndarray:
    path = boost(learners, y, w * mask, nu=nu, m_stop=m_max, eval_weights=w * ~mask)
    return path.eval_risk


def tune_mstop(
    formula: ModelFormula,
    ds: Dataset,
    plan: ResamplePlan = ResamplePlan(),
    m_max: int = 1000,
    nu: float = 0.5,
    learners: Optional[Sequence[BaseLearner]] = None,
    n_jobs: int = 1,
) -> TuningResult:
    """Iteration count minimizing the mean held-out risk over subsamples.

    Every replicate is boosted once for `m_max` iterations on its subsample;
    the risk of the complement rows is recorded along the way. Ties of the
    mean curve go to the smallest iteration count.

    Args:
        formula: model formula.
        ds: complete data.
        plan: subsample replicates.
        m_max: largest iteration count considered.
        nu: shrinkage.
        learners: prebuilt learners of `formula` on `ds`.
        n_jobs: joblib workers; results don't depend on it.

    Raises:
        ConfigurationError: m_max < 0.
        DomainError: a replicate couldn't be drawn with both outcome classes.
    """
    if m_max < 0:
        raise ConfigurationError(f"m_max must be non-negative, got {m_max}.")
    y = outcome_vector(formula, ds)
    w = ds.weights
    if learners is None:
        learners = build_term_set(formula, ds)
    masks: List[np.ndarray] = [
        subsample_mask(plan, y, w, replicate)
        for replicate in range(plan.n_replicates)
    ]
    curves = Parallel(n_jobs=n_jobs)(
        delayed(_held_out_curve)(learners, y, w, mask, nu, m_max) for mask in masks
    )
    result = TuningResult(0, np.vstack(curves), masks, plan)
    m_star = int(np.argmin(result.mean_curve))
    logger.info(
        "Tuned m_stop = %d over %d replicates (mean held-out risk %.6g).",
        m_star,
        plan.n_replicates,
        result.mean_curve[m_star],
    )
    return TuningResult(m_star, result.curves, masks, plan)


def save_risk_curves(result: TuningResult, filename: DumpTarget) -> None:
    with ensure_open(filename, "w") as f:
        result.to_frame().to_csv(f, index=False, lineterminator="\n")


TUNING_SCHEMA_VERSION = 1


def convert_tuning_result_to_dict(result: TuningResult) -> Dict[str, Any]:
    return {
        "schema_version": TUNING_SCHEMA_VERSION,
        "m_star": result.m_star,
        "m_max": result.m_max,
        "plan": result.plan.to_dict(),
        "mean_risk": [float(value) for value in result.mean_curve],
    }


def save_tuning_summary(result: TuningResult, filename: DumpTarget) -> None:
    save_generic_dict(convert_tuning_result_to_dict(result), filename)


def load_tuning_summary(file: LoadSource) -> Dict[str, Any]:
    """Tuning summary with keys m_star, m_max, plan and mean_risk.

    Raises:
        ConfigurationError: unsupported schema version or no m_star.
    """
    dictionary = load_json(file)
    if dictionary.get("schema_version") != TUNING_SCHEMA_VERSION:
        raise ConfigurationError(
            f"Unsupported tuning summary version {dictionary.get('schema_version')}."
        )
    if int(dictionary.get("m_star", -1)) < 0:
        raise ConfigurationError("Tuning summary has no valid m_star.")
    return dictionary
