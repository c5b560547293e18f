################################################################################
# © Copyright 2022 Zapata Computing Inc.
################################################################################
"""Pipeline stages. Each stage reads its inputs from the output directory."""
import logging
import os
from typing import Callable, Dict, List

from ..baselearners import build_term_set
from ..boosting import FittedModel, coefficient_table, fit, save_model
from ..data import (
    Dataset,
    apply_plausibility_filters,
    drop_incomplete_rows,
    load_csv,
    remove_outliers_iqr,
    save_csv,
    save_rejection_report,
)
from ..errors import ConfigurationError
from ..glm import fit_learner_glm, save_glm_table
from ..imputation import run_pmm, save_imputation_log
from ..reporting import render_partial_effect_svg, save_coefficient_table
from ..selection import (
    coefficient_bands,
    default_band_terms,
    effect_bands,
    load_stable_learners,
    load_tuning_summary,
    run_bootstrap,
    save_partial_effect,
    save_risk_curves,
    save_stability_report,
    save_tuning_summary,
    stability_select,
    tune_mstop,
)
from ..utils import ensure_directory, save_generic_dict, spawn_seed
from ._config import RunConfig

logger = logging.getLogger(__name__)

CLEANED = "cleaned.csv"
IMPUTED = "imputed.csv"
MSTOP = "mstop.json"
MODEL = "model.json"
COEFFICIENTS = "coefficients.csv"
STABILITY = "stability.csv"

STABILITY_SEED_KEY = 1
BOOTSTRAP_SEED_KEY = 2


def _output(cfg: RunConfig, name: str) -> str:
    return os.path.join(cfg.output_dir, name)


def _required(cfg: RunConfig, name: str, stage: str, producer: str) -> str:
    path = _output(cfg, name)
    if not os.path.exists(path):
        raise ConfigurationError(
            f"Stage '{stage}' needs {path}; run '{producer}' first."
        )
    return path


def _model_data(cfg: RunConfig, stage: str) -> Dataset:
    return load_csv(_required(cfg, IMPUTED, stage, "impute"), cfg.schema)


def _m_star(cfg: RunConfig, stage: str) -> int:
    return int(load_tuning_summary(_required(cfg, MSTOP, stage, "tune"))["m_star"])


def _stable_learners(cfg: RunConfig) -> List[str]:
    path = _output(cfg, STABILITY)
    if not os.path.exists(path):
        logger.info("No %s, using every term.", path)
        return []
    return load_stable_learners(path)


def _full_fit(cfg: RunConfig, ds: Dataset, stage: str) -> FittedModel:
    return fit(cfg.formula, ds, nu=cfg.nu, m_stop=_m_star(cfg, stage))


def prepare(cfg: RunConfig) -> None:
    """Plausibility filters, boxplot outliers and optionally complete cases."""
    ds = load_csv(cfg.input_path, cfg.schema)
    ds, report = apply_plausibility_filters(ds, cfg.filters)
    save_rejection_report(report, _output(cfg, "rejections_filters.csv"))
    ds, report = remove_outliers_iqr(ds, cfg.outlier_columns, cfg.outlier_multiplier)
    save_rejection_report(report, _output(cfg, "rejections_outliers.csv"))
    if cfg.complete_cases:
        ds, report = drop_incomplete_rows(ds)
        save_rejection_report(report, _output(cfg, "rejections_incomplete.csv"))
    save_csv(ds, _output(cfg, CLEANED))
    logger.info("Prepared %d rows.", ds.n_rows)


def impute(cfg: RunConfig) -> None:
    """PMM imputation; the plausibility rules are applied again afterwards."""
    ds = load_csv(_required(cfg, CLEANED, "impute", "prepare"), cfg.schema)
    ds, run_log = run_pmm(ds, cfg.imputation)
    save_imputation_log(run_log, _output(cfg, "imputation_log.txt"))
    ds, report = apply_plausibility_filters(ds, cfg.filters)
    save_rejection_report(report, _output(cfg, "rejections_refilter.csv"))
    save_csv(ds, _output(cfg, IMPUTED))


def tune(cfg: RunConfig) -> None:
    ds = _model_data(cfg, "tune")
    result = tune_mstop(
        cfg.formula,
        ds,
        cfg.tuning,
        m_max=cfg.m_max,
        nu=cfg.nu,
        learners=build_term_set(cfg.formula, ds),
        n_jobs=cfg.workers,
    )
    save_risk_curves(result, _output(cfg, "risk_curves.csv"))
    save_tuning_summary(result, _output(cfg, MSTOP))


def fit_model(cfg: RunConfig) -> None:
    model = _full_fit(cfg, _model_data(cfg, "fit"), "fit")
    save_model(model, _output(cfg, MODEL))
    save_coefficient_table(coefficient_table(model), _output(cfg, COEFFICIENTS))


def stabsel(cfg: RunConfig) -> None:
    ds = _model_data(cfg, "stabsel")
    settings = cfg.stability
    report = stability_select(
        cfg.formula,
        ds,
        n_replicates=settings.n_replicates,
        fraction=settings.fraction,
        threshold=settings.threshold,
        q=settings.q,
        m_max=cfg.m_max,
        nu=cfg.nu,
        seed=spawn_seed(cfg.seed, STABILITY_SEED_KEY),
        stratify_by_outcome=cfg.tuning.stratify_by_outcome,
        n_jobs=cfg.workers,
    )
    save_stability_report(report, _output(cfg, STABILITY))
    save_generic_dict(report.summary(), _output(cfg, "stability_summary.json"))


def bands(cfg: RunConfig) -> None:
    """Bootstrap bands of the stable terms (every term without a report).

    Estimates come from the full-data fit at the tuned m_stop.
    """
    ds = _model_data(cfg, "bands")
    model = _full_fit(cfg, ds, "bands")
    settings = cfg.bootstrap
    run = run_bootstrap(
        model,
        ds,
        settings.n_replicates,
        seed=spawn_seed(cfg.seed, BOOTSTRAP_SEED_KEY),
        stratify_by_outcome=cfg.tuning.stratify_by_outcome,
        n_jobs=cfg.workers,
    )
    note = (
        f"Estimate: full-data fit at m_stop = {model.m_stop}. Band: pointwise "
        f"{settings.level:g} percentile interval of {settings.n_replicates} "
        "bootstrap refits."
    )
    term_ids = default_band_terms(model, _stable_learners(cfg))
    for effect in effect_bands(model, run, term_ids, level=settings.level):
        save_partial_effect(effect, _output(cfg, f"partial_{effect.term_id}.csv"))
        if effect.grid.ndim == 1:
            render_partial_effect_svg(
                effect, _output(cfg, f"partial_{effect.term_id}.svg"), note
            )
    table = coefficient_table(model, coefficient_bands(run, settings.level))
    save_coefficient_table(table, _output(cfg, COEFFICIENTS))


def glm(cfg: RunConfig) -> None:
    """Unpenalized probit GLM on the stable (else selected) parametric learners."""
    ds = _model_data(cfg, "glm")
    model = _full_fit(cfg, ds, "glm")
    learner_ids = _stable_learners(cfg) or None
    save_glm_table(fit_learner_glm(model, ds, learner_ids), _output(cfg, "glm.csv"))


STAGES: Dict[str, Callable[[RunConfig], None]] = {
    "prepare": prepare,
    "impute": impute,
    "tune": tune,
    "fit": fit_model,
    "stabsel": stabsel,
    "bands": bands,
    "glm": glm,
}


def run_stage(name: str, cfg: RunConfig) -> None:
    """Run one stage, or every stage in order for "all"."""
    ensure_directory(cfg.output_dir)
    names = list(STAGES) if name == "all" else [name]
    for stage in names:
        if stage not in STAGES:
            raise ConfigurationError(f"Unknown subcommand '{stage}'.")
        logger.info("Running stage '%s'.", stage)
        STAGES[stage](cfg)
