################################################################################
# © Copyright 2022 Zapata Computing Inc.
################################################################################
import io
from pathlib import Path

import pytest

from orquestra.gamboost.baselearners import ModelFormula, TermKind, TermSpec
from orquestra.gamboost.cli import (
    BootstrapSettings,
    RunConfig,
    StabilitySettings,
    load_run_config,
)
from orquestra.gamboost.data import ColumnKind, ColumnSchema, FilterRule
from orquestra.gamboost.errors import ConfigurationError
from orquestra.gamboost.utils import save_generic_dict

SCHEMA = (
    ColumnSchema("y", ColumnKind.CATEGORICAL, ("0", "1")),
    ColumnSchema("age", ColumnKind.CONTINUOUS),
    ColumnSchema("consent", ColumnKind.CATEGORICAL, ("no", "yes")),
    ColumnSchema("weight", ColumnKind.WEIGHT),
)
FORMULA = ModelFormula(
    "y",
    (
        TermSpec("age", TermKind.SMOOTH, ("age",)),
        TermSpec("consent", TermKind.CATEGORICAL, ("consent",)),
    ),
)


def _config(**kwargs):
    return RunConfig("survey.csv", SCHEMA, FORMULA, **kwargs)


class TestRunConfig:
    def test_dict_conversion(self):
        cfg = _config(
            filters=(FilterRule("r1", "adult", "age >= 15"),),
            outlier_columns=("age",),
            stability=StabilitySettings(50, 0.5, 0.9, 5),
            bootstrap=BootstrapSettings(200, 0.9),
            seed=99,
            workers=3,
        )
        assert RunConfig.from_dict(cfg.to_dict()) == cfg

    def test_seed_drives_every_random_step(self):
        cfg = _config(seed=7)
        assert cfg.tuning.seed == 7
        assert cfg.imputation.seed == 7

    def test_overrides(self):
        cfg = _config(seed=7).with_overrides(seed=8, workers=2, output_dir="runs")
        assert (cfg.seed, cfg.workers, cfg.output_dir) == (8, 2, "runs")
        assert cfg.tuning.seed == cfg.imputation.seed == 8

    def test_missing_overrides_keep_configuration(self):
        cfg = _config(seed=7)
        assert cfg.with_overrides() == cfg

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"nu": 0.0},
            {"nu": 1.5},
            {"m_max": 0},
            {"workers": 0},
            {"outlier_columns": ("height",)},
        ],
    )
    def test_invalid_settings_raise_configuration_error(self, kwargs):
        with pytest.raises(ConfigurationError):
            _config(**kwargs)

    def test_formula_with_undeclared_column_is_rejected(self):
        formula = ModelFormula("y", (TermSpec("h", TermKind.LINEAR, ("height",)),))
        with pytest.raises(ConfigurationError, match="height"):
            RunConfig("survey.csv", SCHEMA, formula)

    @pytest.mark.parametrize("threshold", [0.5, 1.1])
    def test_stability_threshold_outside_of_range(self, threshold):
        with pytest.raises(ConfigurationError, match="threshold"):
            StabilitySettings(threshold=threshold)

    def test_bootstrap_level_outside_of_range(self):
        with pytest.raises(ConfigurationError):
            BootstrapSettings(level=1.0)


class TestLoadRunConfig:
    def test_minimal_document_uses_defaults(self):
        buffer = io.StringIO()
        save_generic_dict(
            {
                "input": "survey.csv",
                "schema": [column.to_dict() for column in SCHEMA],
                "formula": FORMULA.to_dict(),
            },
            buffer,
        )
        buffer.seek(0)
        cfg = load_run_config(buffer)
        assert cfg.nu == 0.5
        assert cfg.stability.q == 35
        assert cfg.bootstrap.n_replicates == 1000
        assert cfg.tuning.n_replicates == 25

    def test_missing_section_is_reported(self):
        buffer = io.StringIO('{"input": "survey.csv"}')
        with pytest.raises(ConfigurationError, match="schema"):
            load_run_config(buffer)

    def test_invalid_json_is_configuration_error(self):
        with pytest.raises(ConfigurationError):
            load_run_config(io.StringIO("{not json"))

    def test_missing_file_is_configuration_error(self, tmp_path):
        with pytest.raises(ConfigurationError):
            load_run_config(tmp_path / "absent.json")

    def test_example_configuration_is_valid(self):
        path = Path(__file__).parents[4] / "configs" / "survey_example.json"
        cfg = load_run_config(path)
        assert len(cfg.filters) == 5
        assert cfg.formula.term("location").columns == ("lon", "lat")
