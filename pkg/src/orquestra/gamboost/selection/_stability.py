################################################################################
# © Copyright 2022 Zapata Computing Inc.
################################################################################
"""Stability selection of base learners over subsamples."""
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from ..baselearners import (
    INTERCEPT_ID,
    BaseLearner,
    ModelFormula,
    build_term_set,
    outcome_vector,
)
from ..boosting import boost
from ..data import Dataset
from ..errors import ConfigurationError
from ..typing import DumpTarget, LoadSource
from ..utils import RNDSEED, ensure_open
from ._plans import ResamplePlan, subsample_mask

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class StabilityReport:
    """Selection frequencies of the selectable learners.

    Args:
        learner_ids: selectable learners (every learner but the intercept).
        term_ids: term of each selectable learner.
        selections: (replicates × learners) indicator of "ever selected".
        threshold: frequency a learner needs to be stable.
        q: number of distinct learners each replicate selects.
    """

    learner_ids: Tuple[str, ...]
    term_ids: Tuple[str, ...]
    selections: np.ndarray
    threshold: float
    q: int

    @property
    def n_replicates(self) -> int:
        return self.selections.shape[0]

    @property
    def p(self) -> int:
        return len(self.learner_ids)

    @property
    def frequencies(self) -> Dict[str, float]:
        return dict(zip(self.learner_ids, self.selections.mean(axis=0).tolist()))

    def stable_at(self, threshold: float) -> List[str]:
        return [
            learner_id
            for learner_id, frequency in self.frequencies.items()
            if frequency >= threshold
        ]

    @property
    def stable_set(self) -> List[str]:
        return self.stable_at(self.threshold)

    @property
    def pfer_bound(self) -> float:
        """Bound q² / ((2 threshold - 1) p) on the expected false selections."""
        return self.q**2 / ((2 * self.threshold - 1) * self.p)

    def to_frame(self) -> pd.DataFrame:
        frequencies = self.selections.mean(axis=0)
        return pd.DataFrame(
            {
                "learner_id": list(self.learner_ids),
                "term_id": list(self.term_ids),
                "frequency": frequencies,
                "stable": frequencies >= self.threshold,
            }
        )

    def summary(self) -> Dict[str, float]:
        return {
            "n_replicates": self.n_replicates,
            "threshold": self.threshold,
            "q": self.q,
            "p": self.p,
            "pfer_bound": self.pfer_bound,
        }


def _distinct_selected(state) -> int:
    return len([i for i in state.selected_ids if i != INTERCEPT_ID])


def _selected_learners(learners, y, w, mask, nu, q, m_max) -> List[str]:
    path = boost(
        learners,
        y,
        w * mask,
        nu=nu,
        m_stop=m_max,
        stop_when=lambda state: _distinct_selected(state) >= q,
    )
    if _distinct_selected(path.state) < q:
        logger.info(
            "Replicate stopped at m_max = %d with %d of %d learners selected.",
            m_max,
            _distinct_selected(path.state),
            q,
        )
    return path.state.selected_ids


def stability_select(
    formula: ModelFormula,
    ds: Dataset,
    n_replicates: int = 100,
    fraction: float = 0.5,
    threshold: float = 0.8,
    q: int = 35,
    m_max: int = 1000,
    nu: float = 0.5,
    seed: Optional[int] = None,
    stratify_by_outcome: bool = True,
    learners: Optional[Sequence[BaseLearner]] = None,
    n_jobs: int = 1,
) -> StabilityReport:
    """Selection frequencies of learners over subsamples.

    Each replicate boosts on floor(fraction · n) rows until q distinct
    learners (the intercept aside) have been selected, or m_max iterations.
    A learner counts once per replicate.

    Raises:
        ConfigurationError: threshold outside of (0.5, 1], or q outside of
            [1, number of selectable learners].
    """
    if not 0.5 < threshold <= 1:
        raise ConfigurationError(f"Threshold must be in (0.5, 1], got {threshold}.")
    if learners is None:
        learners = build_term_set(formula, ds)
    selectable = [bl for bl in learners if bl.learner_id != INTERCEPT_ID]
    if not 1 <= q <= len(selectable):
        raise ConfigurationError(
            f"q must be between 1 and the {len(selectable)} selectable learners, "
            f"got {q}."
        )
    plan = ResamplePlan(
        n_replicates,
        fraction,
        RNDSEED if seed is None else seed,
        stratify_by_outcome,
    )
    y = outcome_vector(formula, ds)
    w = ds.weights
    masks = [subsample_mask(plan, y, w, replicate) for replicate in range(n_replicates)]
    selected = Parallel(n_jobs=n_jobs)(
        delayed(_selected_learners)(learners, y, w, mask, nu, q, m_max)
        for mask in masks
    )

    learner_ids = tuple(bl.learner_id for bl in selectable)
    selections = np.array(
        [[learner_id in chosen for learner_id in learner_ids] for chosen in selected],
        dtype=bool,
    )
    report = StabilityReport(
        learner_ids, tuple(bl.term_id for bl in selectable), selections, threshold, q
    )
    logger.info(
        "Stable learners at threshold %g: %s (PFER bound %.3g).",
        threshold,
        ", ".join(report.stable_set) or "none",
        report.pfer_bound,
    )
    return report


def save_stability_report(report: StabilityReport, filename: DumpTarget) -> None:
    with ensure_open(filename, "w") as f:
        report.to_frame().to_csv(f, index=False, lineterminator="\n")


def load_stable_learners(file: LoadSource) -> List[str]:
    """Ids of the learners flagged stable in a saved stability report."""
    with ensure_open(file) as f:
        frame = pd.read_csv(f, dtype={"learner_id": str, "term_id": str})
    return frame.loc[frame["stable"].astype(bool), "learner_id"].tolist()
