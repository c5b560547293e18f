################################################################################
# © Copyright 2022 Zapata Computing Inc.
################################################################################
"""Component-wise gradient boosting of additive probit models."""
from ._effects import (
    OFFSET_KEY,
    PartialEffect,
    coefficient_rows,
    coefficient_table,
    default_grid,
    grid_values,
    partial_effect,
    term_contribution,
)
from ._engine import (
    BoostPath,
    BoostState,
    HistoryEntry,
    boost,
    boost_step,
    prepare_learners,
)
from ._io import convert_dict_to_model, convert_model_to_dict, load_model, save_model
from ._loss import (
    ETA_BOUND,
    ProbitLoss,
    fisher_weights,
    negative_gradient,
    offset_init,
    probit_loss,
    probit_risk,
)
from ._model import FittedModel, fit, linear_predictor, predict
