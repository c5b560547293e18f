################################################################################
# © Copyright 2022 Zapata Computing Inc.
################################################################################
from ._simgen import (
    BINARY_LEVELS,
    SMOOTH_SHAPES,
    TruthRecord,
    TruthSpec,
    convert_truth_record_to_dict,
    finite_diff_gradient,
    gen_probit_data,
    load_truth_record,
    oracle_irls_probit,
    recompute_eta,
    save_truth_record,
    truth_formula,
)
