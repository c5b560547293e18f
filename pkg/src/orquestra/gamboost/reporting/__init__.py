################################################################################
# © Copyright 2022 Zapata Computing Inc.
################################################################################
"""Plots and tables emitted by the command line pipeline."""
from ._svg import partial_effect_svg, render_partial_effect_svg
from ._tables import (
    COEFFICIENT_COLUMNS,
    load_coefficient_table,
    save_coefficient_table,
)
