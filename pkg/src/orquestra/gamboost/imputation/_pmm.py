################################################################################
# © Copyright 2022 Zapata Computing Inc.
################################################################################
"""Single imputation by predictive mean matching with chained equations."""
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from ..data import ColumnKind, Dataset
from ..data._transforms import dummy_matrix
from ..errors import ConfigurationError, DomainError
from ..typing import DumpTarget
from ..utils import RNDSEED, ensure_open

logger = logging.getLogger(__name__)

RIDGE_JITTER = 1e-8

_DEFAULT_PREDICTOR_KINDS = (
    ColumnKind.CONTINUOUS,
    ColumnKind.COORDINATE,
    ColumnKind.CATEGORICAL,
)


@dataclass(frozen=True)
class ImputationConfig:
    """Settings of a predictive mean matching run.

    Args:
        donor_pool_size: number of closest observed cases a donor is drawn from.
        n_cycles: passes over all target columns.
        seed: seed of the random draws.
        predictor_sets: predictors per target column. Targets not listed use all
            other continuous, coordinate and categorical columns.
    """

    donor_pool_size: int = 5
    n_cycles: int = 5
    seed: int = RNDSEED
    predictor_sets: Mapping[str, Tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self):
        if self.donor_pool_size < 1:
            raise ConfigurationError(
                f"donor_pool_size must be at least 1, got {self.donor_pool_size}."
            )
        if self.n_cycles < 1:
            raise ConfigurationError(
                f"n_cycles must be at least 1, got {self.n_cycles}."
            )
        object.__setattr__(
            self,
            "predictor_sets",
            {target: tuple(names) for target, names in self.predictor_sets.items()},
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "donor_pool_size": self.donor_pool_size,
            "n_cycles": self.n_cycles,
            "seed": self.seed,
            "predictor_sets": {k: list(v) for k, v in self.predictor_sets.items()},
        }

    @classmethod
    def from_dict(cls, dictionary: Mapping[str, Any]) -> "ImputationConfig":
        return cls(
            donor_pool_size=int(dictionary.get("donor_pool_size", 5)),
            n_cycles=int(dictionary.get("n_cycles", 5)),
            seed=int(dictionary.get("seed", RNDSEED)),
            predictor_sets=dictionary.get("predictor_sets", {}),
        )


@dataclass(frozen=True)
class FallbackEvent:
    cycle: int
    column: str
    reason: str


@dataclass
class ImputationRunLog:
    """Per-column imputation counts and fallback events of one run."""

    config: ImputationConfig
    imputed_counts: Dict[str, int] = field(default_factory=dict)
    fallbacks: List[FallbackEvent] = field(default_factory=list)

    def render(self) -> str:
        lines = [
            "predictive mean matching",
            f"donor_pool_size: {self.config.donor_pool_size}",
            f"n_cycles: {self.config.n_cycles}",
            f"seed: {self.config.seed}",
            "imputed cells:",
        ]
        if not self.imputed_counts:
            lines.append("  none")
        lines.extend(
            f"  {column}: {count}" for column, count in self.imputed_counts.items()
        )
        lines.append("fallbacks:")
        if not self.fallbacks:
            lines.append("  none")
        lines.extend(
            f"  cycle {event.cycle}, {event.column}: {event.reason}"
            for event in self.fallbacks
        )
        return "\n".join(lines) + "\n"


def save_imputation_log(run_log: ImputationRunLog, filename: DumpTarget) -> None:
    with ensure_open(filename, "w") as f:
        f.write(run_log.render())


def _n_levels(ds: Dataset, name: str) -> int:
    return len(ds.levels[name])


def _predictor_names(ds: Dataset, target: str, cfg: ImputationConfig) -> List[str]:
    if target in cfg.predictor_sets:
        names = list(cfg.predictor_sets[target])
        for name in names:
            ds.column_schema(name)
        if target in names:
            raise ConfigurationError(f"Column '{target}' can't predict itself.")
        return names
    return [
        name
        for name in ds.column_names
        if name != target and ds.kind(name) in _DEFAULT_PREDICTOR_KINDS
    ]


def _reference_code(ds: Dataset, name: str) -> int:
    reference = ds.reference(name)
    return ds.levels[name].index(reference) if reference is not None else 0


def _predictor_design(
    ds: Dataset, current: Mapping[str, np.ndarray], names: Sequence[str]
) -> np.ndarray:
    blocks = [np.ones((ds.n_rows, 1))]
    for name in names:
        if ds.kind(name).is_numeric:
            blocks.append(current[name][:, None])
        else:
            n_levels = _n_levels(ds, name)
            blocks.append(
                dummy_matrix(current[name], n_levels, _reference_code(ds, name))
            )
    return np.hstack(blocks)


def _weighted_ridge_fit(
    design: np.ndarray, response: np.ndarray, weights: np.ndarray
) -> Optional[np.ndarray]:
    """Weighted least squares with ridge jitter; None if the system is singular."""
    weighted = design * weights[:, None]
    gram = design.T @ weighted + RIDGE_JITTER * np.eye(design.shape[1])
    try:
        coefficients = scipy.linalg.solve(gram, weighted.T @ response, assume_a="pos")
    except (scipy.linalg.LinAlgError, ValueError):
        return None
    if not np.all(np.isfinite(coefficients)):
        return None
    return coefficients


def nearest_donors(distances: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k smallest distances; ties are resolved by position."""
    if k >= distances.size:
        return np.arange(distances.size)
    kth = np.partition(distances, k - 1)[k - 1]
    closer = np.flatnonzero(distances < kth)
    tied = np.flatnonzero(distances == kth)
    return np.concatenate([closer, tied[: k - closer.size]])


def _match(
    predicted: np.ndarray,
    observed_rows: np.ndarray,
    missing_rows: np.ndarray,
    k: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Donor row for every missing row, drawn among the k closest predictions."""
    observed_predictions = predicted[observed_rows]
    donors = np.empty(missing_rows.size, dtype=np.int64)
    for position, row in enumerate(missing_rows):
        difference = observed_predictions - predicted[row]
        if difference.ndim == 1:
            distances = np.abs(difference)
        else:
            distances = np.sqrt(np.sum(difference**2, axis=1))
        pool = nearest_donors(distances, k)
        donors[position] = observed_rows[pool[rng.integers(pool.size)]]
    return donors


def _impute_column(
    ds: Dataset,
    current: Dict[str, np.ndarray],
    target: str,
    predictors: Sequence[str],
    missing: np.ndarray,
    cfg: ImputationConfig,
    rng: np.random.Generator,
) -> Optional[str]:
    """One PMM update of `target`; returns the fallback reason, if any."""
    observed_rows = np.flatnonzero(~missing)
    missing_rows = np.flatnonzero(missing)
    weights = ds.weights
    fit_weights = np.where(missing, 0.0, weights)

    if ds.kind(target).is_numeric:
        response = current[target]
    else:
        response = (
            current[target][:, None] == np.arange(_n_levels(ds, target))[None, :]
        ).astype(float)

    design = _predictor_design(ds, current, predictors)
    coefficients = _weighted_ridge_fit(design, response, fit_weights)
    if coefficients is None:
        donors = observed_rows[rng.integers(observed_rows.size, size=missing_rows.size)]
        current[target][missing_rows] = current[target][donors]
        return "singular predictor regression, marginal donor draw"

    predicted = design @ coefficients
    donors = _match(predicted, observed_rows, missing_rows, cfg.donor_pool_size, rng)
    current[target][missing_rows] = current[target][donors]
    return None


def run_pmm(ds: Dataset, cfg: ImputationConfig) -> Tuple[Dataset, ImputationRunLog]:
    """Impute every missing cell by predictive mean matching.

    Target columns (all non-weight columns with missing cells) are visited in
    schema order, `cfg.n_cycles` times. Missing cells start from random draws
    of the column's observed values; each visit regresses the target on the
    current state of its predictors (weighted, ridge jitter 1e-8; categorical
    targets regress their level indicators) and replaces the missing cells by
    the value of a donor drawn uniformly among the `donor_pool_size` observed
    cases with the closest predictions.

    Args:
        ds: dataset with missing cells.
        cfg: run settings.

    Returns:
        The completed dataset, observed cells unchanged, and the run log.

    Raises:
        DomainError: a target column has fewer observed cells than
            `cfg.donor_pool_size`.
        ConfigurationError: a predictor set names an unknown column.
    """
    run_log = ImputationRunLog(cfg)
    targets = [
        name
        for name in ds.column_names
        if ds.kind(name) != ColumnKind.WEIGHT and ds.missing(name).any()
    ]
    if not targets:
        logger.info("No missing cells, nothing to impute.")
        return ds, run_log

    masks = {name: ds.missing(name) for name in targets}
    for name in targets:
        n_observed = int((~masks[name]).sum())
        if n_observed < cfg.donor_pool_size:
            raise DomainError(
                f"Column '{name}' has {n_observed} observed values, fewer than "
                f"the donor pool size {cfg.donor_pool_size}."
            )
    predictor_sets = {name: _predictor_names(ds, name, cfg) for name in targets}

    rng = np.random.default_rng(cfg.seed)
    current = {
        name: np.array(
            ds.values(name), dtype=float if ds.kind(name).is_numeric else np.int64
        )
        for name in ds.column_names
    }
    for name in targets:
        observed = current[name][~masks[name]]
        current[name][masks[name]] = observed[
            rng.integers(observed.size, size=int(masks[name].sum()))
        ]

    for cycle in range(1, cfg.n_cycles + 1):
        for name in targets:
            reason = _impute_column(
                ds, current, name, predictor_sets[name], masks[name], cfg, rng
            )
            if reason is not None:
                run_log.fallbacks.append(FallbackEvent(cycle, name, reason))
                logger.warning("Cycle %d, column '%s': %s", cycle, name, reason)

    for name in targets:
        run_log.imputed_counts[name] = int(masks[name].sum())
        logger.info("Imputed %d cells of column '%s'.", masks[name].sum(), name)

    imputed = ds.with_columns({name: current[name] for name in targets})
    return imputed, run_log


def pmm_impute(ds: Dataset, cfg: ImputationConfig) -> Dataset:
    """Completed dataset of `run_pmm` (see there)."""
    imputed, _ = run_pmm(ds, cfg)
    return imputed
