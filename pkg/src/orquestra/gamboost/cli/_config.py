################################################################################
# © Copyright 2022 Zapata Computing Inc.
################################################################################
"""Run configuration of the command line pipeline."""
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Mapping, Optional, Tuple

from ..baselearners import ModelFormula, validate_formula
from ..data import ColumnSchema, FilterRule, validate_schema
from ..errors import ConfigurationError
from ..imputation import ImputationConfig
from ..selection import ResamplePlan
from ..typing import LoadSource
from ..utils import RNDSEED, load_json


@dataclass(frozen=True)
class StabilitySettings:
    n_replicates: int = 100
    fraction: float = 0.5
    threshold: float = 0.8
    q: int = 35

    def __post_init__(self):
        if not 0.5 < self.threshold <= 1:
            raise ConfigurationError(
                f"Stability threshold must be in (0.5, 1], got {self.threshold}."
            )
        if self.n_replicates < 1 or self.q < 1:
            raise ConfigurationError(
                "Stability selection needs at least one replicate and q >= 1."
            )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n_replicates": self.n_replicates,
            "fraction": self.fraction,
            "threshold": self.threshold,
            "q": self.q,
        }

    @classmethod
    def from_dict(cls, dictionary: Mapping[str, Any]) -> "StabilitySettings":
        return cls(
            n_replicates=int(dictionary.get("n_replicates", 100)),
            fraction=float(dictionary.get("fraction", 0.5)),
            threshold=float(dictionary.get("threshold", 0.8)),
            q=int(dictionary.get("q", 35)),
        )


@dataclass(frozen=True)
class BootstrapSettings:
    n_replicates: int = 1000
    level: float = 0.95

    def __post_init__(self):
        if self.n_replicates < 1:
            raise ConfigurationError(
                f"Bootstrap needs at least one replicate, got {self.n_replicates}."
            )
        if not 0 < self.level < 1:
            raise ConfigurationError(
                f"Confidence level must be in (0, 1), got {self.level}."
            )

    def to_dict(self) -> Dict[str, Any]:
        return {"n_replicates": self.n_replicates, "level": self.level}

    @classmethod
    def from_dict(cls, dictionary: Mapping[str, Any]) -> "BootstrapSettings":
        return cls(
            n_replicates=int(dictionary.get("n_replicates", 1000)),
            level=float(dictionary.get("level", 0.95)),
        )


def _rule_from_dict(dictionary: Mapping[str, Any]) -> FilterRule:
    try:
        return FilterRule(
            dictionary["id"],
            dictionary.get("description", ""),
            dictionary["expression"],
        )
    except KeyError as error:
        raise ConfigurationError(f"Filter rule misses key {error}.") from error


def _rule_to_dict(rule: FilterRule) -> Dict[str, str]:
    return {
        "id": rule.rule_id,
        "description": rule.description,
        "expression": rule.expression,
    }


@dataclass(frozen=True)
class RunConfig:
    """Everything one pipeline run depends on.

    Args:
        input_path: survey CSV read by `prepare`.
        schema: column declarations of the input.
        filters: plausibility rules.
        outlier_columns: continuous columns screened with boxplot fences.
        outlier_multiplier: IQR multiplier of the fences.
        complete_cases: drop incomplete rows in `prepare` instead of imputing.
        imputation: predictive mean matching settings.
        formula: model formula.
        nu: shrinkage.
        m_max: largest iteration count considered by tuning and stability
            selection.
        tuning: subsample plan of the m_stop tuning (its seed is replaced by
            `seed`).
        stability: stability selection settings.
        bootstrap: bootstrap band settings.
        output_dir: directory all stage outputs are written to.
        seed: seed of every random step.
        workers: joblib workers of the resampling stages.
    """

    input_path: str
    schema: Tuple[ColumnSchema, ...]
    formula: ModelFormula
    filters: Tuple[FilterRule, ...] = ()
    outlier_columns: Tuple[str, ...] = ()
    outlier_multiplier: float = 1.5
    complete_cases: bool = False
    imputation: ImputationConfig = field(default_factory=ImputationConfig)
    nu: float = 0.5
    m_max: int = 1000
    tuning: ResamplePlan = field(default_factory=ResamplePlan)
    stability: StabilitySettings = field(default_factory=StabilitySettings)
    bootstrap: BootstrapSettings = field(default_factory=BootstrapSettings)
    output_dir: str = "out"
    seed: int = RNDSEED
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "schema", tuple(self.schema))
        object.__setattr__(self, "filters", tuple(self.filters))
        object.__setattr__(self, "outlier_columns", tuple(self.outlier_columns))
        validate_schema(self.schema)
        kinds = {column.name: column.kind for column in self.schema}
        validate_formula(self.formula, kinds)
        for name in self.outlier_columns:
            if name not in kinds:
                raise ConfigurationError(f"Outlier column '{name}' is not declared.")
        if not 0 < self.nu <= 1:
            raise ConfigurationError(f"Shrinkage nu must be in (0, 1], got {self.nu}.")
        if self.m_max < 1:
            raise ConfigurationError(f"m_max must be at least 1, got {self.m_max}.")
        if self.workers < 1:
            raise ConfigurationError(f"workers must be at least 1, got {self.workers}.")
        # one seed drives every random step
        object.__setattr__(self, "tuning", replace(self.tuning, seed=self.seed))
        object.__setattr__(self, "imputation", replace(self.imputation, seed=self.seed))

    def with_overrides(
        self,
        seed: Optional[int] = None,
        workers: Optional[int] = None,
        output_dir: Optional[str] = None,
    ) -> "RunConfig":
        changes: Dict[str, Any] = {}
        if seed is not None:
            changes["seed"] = seed
        if workers is not None:
            changes["workers"] = workers
        if output_dir is not None:
            changes["output_dir"] = output_dir
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "input": self.input_path,
            "schema": [column.to_dict() for column in self.schema],
            "filters": [_rule_to_dict(rule) for rule in self.filters],
            "outliers": {
                "columns": list(self.outlier_columns),
                "multiplier": self.outlier_multiplier,
            },
            "complete_cases": self.complete_cases,
            "imputation": self.imputation.to_dict(),
            "formula": self.formula.to_dict(),
            "boosting": {"nu": self.nu, "m_max": self.m_max},
            "tuning": self.tuning.to_dict(),
            "stability": self.stability.to_dict(),
            "bootstrap": self.bootstrap.to_dict(),
            "output_dir": self.output_dir,
            "seed": self.seed,
            "workers": self.workers,
        }

    @classmethod
    def from_dict(cls, dictionary: Mapping[str, Any]) -> "RunConfig":
        for key in ("input", "schema", "formula"):
            if key not in dictionary:
                raise ConfigurationError(f"Run configuration misses '{key}'.")
        outliers = dictionary.get("outliers", {})
        boosting = dictionary.get("boosting", {})
        return cls(
            input_path=str(dictionary["input"]),
            schema=tuple(ColumnSchema.from_dict(c) for c in dictionary["schema"]),
            formula=ModelFormula.from_dict(dictionary["formula"]),
            filters=tuple(_rule_from_dict(r) for r in dictionary.get("filters", [])),
            outlier_columns=tuple(outliers.get("columns", ())),
            outlier_multiplier=float(outliers.get("multiplier", 1.5)),
            complete_cases=bool(dictionary.get("complete_cases", False)),
            imputation=ImputationConfig.from_dict(dictionary.get("imputation", {})),
            nu=float(boosting.get("nu", 0.5)),
            m_max=int(boosting.get("m_max", 1000)),
            tuning=ResamplePlan.from_dict(dictionary.get("tuning", {})),
            stability=StabilitySettings.from_dict(dictionary.get("stability", {})),
            bootstrap=BootstrapSettings.from_dict(dictionary.get("bootstrap", {})),
            output_dir=str(dictionary.get("output_dir", "out")),
            seed=int(dictionary.get("seed", RNDSEED)),
            workers=int(dictionary.get("workers", 1)),
        )


def load_run_config(file: LoadSource) -> RunConfig:
    """Read a JSON run configuration.

    Raises:
        ConfigurationError: unreadable document or invalid settings.
    """
    try:
        dictionary = load_json(file)
    except (OSError, ValueError) as error:
        raise ConfigurationError(f"Cannot read run configuration: {error}") from error
    if not isinstance(dictionary, dict):
        raise ConfigurationError("Run configuration must be a JSON object.")
    return RunConfig.from_dict(dictionary)
