################################################################################
# © Copyright 2022 Zapata Computing Inc.
################################################################################
"""Resampling: iteration tuning, stability selection and bootstrap bands."""
from ._bootstrap import (
    OFFSET_KEY,
    BootstrapRun,
    bootstrap_bands,
    coefficient_bands,
    default_band_terms,
    effect_bands,
    run_bootstrap,
    save_partial_effect,
)
from ._plans import MAX_REDRAWS, ResamplePlan, bootstrap_counts, subsample_mask
from ._stability import (
    StabilityReport,
    load_stable_learners,
    save_stability_report,
    stability_select,
)
from ._tuning import (
    TUNING_SCHEMA_VERSION,
    TuningResult,
    convert_tuning_result_to_dict,
    load_tuning_summary,
    save_risk_curves,
    save_tuning_summary,
    tune_mstop,
)
