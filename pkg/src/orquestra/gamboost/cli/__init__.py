################################################################################
# © Copyright 2022 Zapata Computing Inc.
################################################################################
"""Command line pipeline: prepare, impute, tune, fit, stabsel, bands, glm."""
from ._config import (
    BootstrapSettings,
    RunConfig,
    StabilitySettings,
    load_run_config,
)
from ._main import (
    EXIT_CONFIGURATION,
    EXIT_DATA,
    EXIT_IO,
    EXIT_NUMERICAL,
    EXIT_OK,
    SUBCOMMANDS,
    exit_code,
    main,
    run,
)
from ._stages import STAGES, run_stage
