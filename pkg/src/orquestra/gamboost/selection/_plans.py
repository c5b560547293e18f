################################################################################
# © Copyright 2022 Zapata Computing Inc.
################################################################################
"""Reproducible subsample and bootstrap draws, expressed as row weights."""
import logging
from dataclasses import dataclass
from typing import Any, Dict, Mapping

import numpy as np
from sklearn.model_selection import ShuffleSplit, StratifiedShuffleSplit
from sklearn.utils import resample

from ..errors import ConfigurationError, DomainError
from ..utils import RNDSEED, spawn_seed

logger = logging.getLogger(__name__)

MAX_REDRAWS = 10


@dataclass(frozen=True)
class ResamplePlan:
    """Replicates of floor(fraction · n) rows drawn without replacement.

    Replicate r is drawn from a seed derived from (seed, r), so every
    replicate is reproducible on its own.
    """

    n_replicates: int = 25
    fraction: float = 0.5
    seed: int = RNDSEED
    stratify_by_outcome: bool = True

    def __post_init__(self):
        if self.n_replicates < 1:
            raise ConfigurationError(
                "A resample plan needs at least one replicate, got "
                f"{self.n_replicates}."
            )
        if not 0 < self.fraction < 1:
            raise ConfigurationError(
                f"Subsample fraction must be in (0, 1), got {self.fraction}."
            )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n_replicates": self.n_replicates,
            "fraction": self.fraction,
            "seed": self.seed,
            "stratify_by_outcome": self.stratify_by_outcome,
        }

    @classmethod
    def from_dict(cls, dictionary: Mapping[str, Any]) -> "ResamplePlan":
        return cls(
            n_replicates=int(dictionary.get("n_replicates", 25)),
            fraction=float(dictionary.get("fraction", 0.5)),
            seed=int(dictionary.get("seed", RNDSEED)),
            stratify_by_outcome=bool(dictionary.get("stratify_by_outcome", True)),
        )


def _has_both_classes(y: np.ndarray, weights: np.ndarray) -> bool:
    outcome = y[weights > 0]
    return bool(outcome.size) and 0 < outcome.sum() < outcome.size


def _draw_subsample(y: np.ndarray, size: int, seed: int, stratify: bool):
    n = len(y)
    splitter_class = StratifiedShuffleSplit if stratify else ShuffleSplit
    splitter = splitter_class(
        n_splits=1, train_size=size, test_size=n - size, random_state=seed
    )
    try:
        train, _ = next(splitter.split(np.zeros(n), y))
    except ValueError as error:
        raise DomainError(f"Cannot draw a subsample of {size} rows: {error}") from error
    return np.sort(train)


def subsample_mask(
    plan: ResamplePlan, y: np.ndarray, w: np.ndarray, replicate: int
) -> np.ndarray:
    """Training rows of one replicate as a boolean mask.

    A draw whose training part (rows with positive weight) or held-out part
    has a single outcome class is redrawn, at most `MAX_REDRAWS` times.

    Raises:
        DomainError: every draw was degenerate.
    """
    y = np.asarray(y, dtype=float)
    size = int(np.floor(plan.fraction * len(y)))
    if not 0 < size < len(y):
        raise DomainError(
            f"Subsample of {plan.fraction} of {len(y)} rows would be empty or full."
        )
    for attempt in range(MAX_REDRAWS + 1):
        seed = spawn_seed(plan.seed, replicate, attempt)
        mask = np.zeros(len(y), dtype=bool)
        mask[_draw_subsample(y, size, seed, plan.stratify_by_outcome)] = True
        if _has_both_classes(y, w * mask) and _has_both_classes(y, w * ~mask):
            return mask
        logger.info("Replicate %d: single outcome class, redrawing.", replicate)
    raise DomainError(
        f"Replicate {replicate}: {MAX_REDRAWS} redraws all had a single outcome class."
    )


def bootstrap_counts(
    y: np.ndarray, w: np.ndarray, seed: int, replicate: int, stratify: bool = True
) -> np.ndarray:
    """Multiplicity of each row in a bootstrap sample of n rows.

    Raises:
        DomainError: every draw had a single outcome class.
    """
    y = np.asarray(y, dtype=float)
    n = len(y)
    for attempt in range(MAX_REDRAWS + 1):
        rows = resample(
            np.arange(n),
            replace=True,
            n_samples=n,
            random_state=spawn_seed(seed, replicate, attempt),
            stratify=y if stratify else None,
        )
        counts = np.bincount(rows, minlength=n).astype(float)
        if _has_both_classes(y, w * counts):
            return counts
        logger.info(
            "Bootstrap replicate %d: single outcome class, redrawing.", replicate
        )
    raise DomainError(
        f"Bootstrap replicate {replicate}: {MAX_REDRAWS} redraws all had a single "
        "outcome class."
    )
