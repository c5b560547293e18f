################################################################################
# © Copyright 2022 Zapata Computing Inc.
################################################################################
from ._pmm import (
    FallbackEvent,
    ImputationConfig,
    ImputationRunLog,
    nearest_donors,
    pmm_impute,
    run_pmm,
    save_imputation_log,
)
