################################################################################
# © Copyright 2022 Zapata Computing Inc.
################################################################################
"""Penalized least-squares base learners and the model formula they come from."""
from ._encoders import (
    DesignEncoder,
    DummyEncoder,
    InterceptEncoder,
    LinearEncoder,
    Modifier,
    NonlinearEncoder,
    RandomInterceptEncoder,
    TensorEncoder,
    column_values,
    encode,
    level_codes,
)
from ._learner import (
    DF_TOLERANCE,
    BaseLearner,
    FitResult,
    LearnerKind,
    PreparedLearner,
    calibrate_lambda_for_df,
    effective_df,
    fit_penalized_ls,
)
from ._serde import encoder_from_dict, learner_from_dict, penalty_from_dict, to_dict
from ._terms import (
    INTERCEPT_ID,
    ModelFormula,
    TermKind,
    TermSpec,
    build_term_set,
    outcome_vector,
    validate_formula,
)
