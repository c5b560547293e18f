################################################################################
# © Copyright 2022 Zapata Computing Inc.
################################################################################
import numpy as np
import pandas as pd
import pytest

from orquestra.gamboost.baselearners import TermKind, TermSpec
from orquestra.gamboost.cli import (
    EXIT_CONFIGURATION,
    EXIT_DATA,
    EXIT_NUMERICAL,
    EXIT_OK,
    STAGES,
    RunConfig,
    main,
    run,
)
from orquestra.gamboost.data import (
    ColumnKind,
    ColumnSchema,
    Dataset,
    FilterRule,
    save_csv,
)
from orquestra.gamboost.errors import NumericalError
from orquestra.gamboost.imputation import ImputationConfig
from orquestra.gamboost.reporting import load_coefficient_table
from orquestra.gamboost.selection import ResamplePlan
from orquestra.gamboost.testing import TruthSpec, gen_probit_data, truth_formula
from orquestra.gamboost.utils import save_generic_dict

SPEC = TruthSpec(
    300,
    linear_effects={"x": 1.2},
    smooth_effects={"s": "sine"},
    categorical_effects={"c": 0.6},
    n_noise=2,
    seed=53,
)


def _survey() -> Dataset:
    ds = gen_probit_data(SPEC)[0]
    rng = np.random.default_rng(0)
    noise = ds.values("noise_1").copy()
    noise[rng.random(ds.n_rows) < 0.05] = np.nan
    schema = ds.schema + (ColumnSchema("w", ColumnKind.WEIGHT),)
    columns = {**ds.columns, "noise_1": noise, "w": rng.uniform(0.5, 2.0, ds.n_rows)}
    return Dataset(schema, columns, ds.levels)


def _config(input_path, output_dir, **kwargs) -> RunConfig:
    formula = truth_formula(SPEC)
    settings = dict(
        filters=(FilterRule("r1", "x not at the upper end", "x <= 0.98"),),
        outlier_columns=("s",),
        imputation=ImputationConfig(donor_pool_size=3, n_cycles=2),
        m_max=30,
        tuning=ResamplePlan(n_replicates=3),
        output_dir=str(output_dir),
        seed=5,
    )
    settings.update(kwargs)
    return RunConfig(str(input_path), _survey().schema, formula, **settings)


@pytest.fixture(scope="module")
def survey_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("input") / "survey.csv"
    save_csv(_survey(), path)
    return path


def _small(cfg):
    return RunConfig.from_dict(
        {
            **cfg.to_dict(),
            "stability": {"n_replicates": 4, "q": 2},
            "bootstrap": {"n_replicates": 5},
        }
    )


@pytest.fixture(scope="module")
def pipeline_dir(survey_csv, tmp_path_factory):
    output_dir = tmp_path_factory.mktemp("run")
    assert run("all", _small(_config(survey_csv, output_dir))) == EXIT_OK
    return output_dir


class TestPipeline:
    @pytest.mark.parametrize(
        "name",
        [
            "cleaned.csv",
            "rejections_filters.csv",
            "rejections_outliers.csv",
            "imputed.csv",
            "imputation_log.txt",
            "rejections_refilter.csv",
            "risk_curves.csv",
            "mstop.json",
            "model.json",
            "coefficients.csv",
            "stability.csv",
            "stability_summary.json",
            "glm.csv",
        ],
    )
    def test_stage_outputs_exist(self, pipeline_dir, name):
        assert (pipeline_dir / name).is_file()

    def test_partial_effects_are_written_per_term(self, pipeline_dir):
        effects = sorted(path.name for path in pipeline_dir.glob("partial_*.csv"))
        assert effects
        for name in effects:
            assert (pipeline_dir / name.replace(".csv", ".svg")).is_file()

    def test_imputed_data_is_complete(self, pipeline_dir):
        imputed = pd.read_csv(pipeline_dir / "imputed.csv")
        assert not imputed.isna().any().any()
        assert (imputed["x"] <= 0.98).all()

    def test_coefficient_table_has_limits(self, pipeline_dir):
        table = load_coefficient_table(pipeline_dir / "coefficients.csv")
        assert table.loc[0, "factor"] == "(offset)"
        assert not table["ci_low"].isna().any()

    def test_same_seed_gives_identical_outputs(
        self, survey_csv, pipeline_dir, tmp_path
    ):
        assert run("all", _small(_config(survey_csv, tmp_path))) == EXIT_OK
        for path in sorted(pipeline_dir.iterdir()):
            assert (tmp_path / path.name).read_bytes() == path.read_bytes(), path.name

    def test_fit_with_zero_iterations_reports_intercept_only(
        self, pipeline_dir, survey_csv, tmp_path
    ):
        (tmp_path / "imputed.csv").write_bytes(
            (pipeline_dir / "imputed.csv").read_bytes()
        )
        save_generic_dict(
            {"schema_version": 1, "m_star": 0, "m_max": 0}, tmp_path / "mstop.json"
        )
        assert run("fit", _config(survey_csv, tmp_path)) == EXIT_OK
        table = load_coefficient_table(tmp_path / "coefficients.csv")
        assert table["factor"].tolist() == ["(offset)"]


class TestExitCodes:
    def test_stage_without_inputs_is_configuration_error(
        self, survey_csv, tmp_path, capsys
    ):
        assert run("tune", _config(survey_csv, tmp_path)) == EXIT_CONFIGURATION
        assert capsys.readouterr().err.startswith(
            "ConfigurationError in orquestra.gamboost.cli: Stage 'tune' needs"
        )

    def test_undeclared_level_is_data_error(self, tmp_path, capsys):
        path = tmp_path / "survey.csv"
        save_csv(_survey(), path)
        text = path.read_text().replace(",yes", ",perhaps", 1)
        path.write_text(text)
        assert run("prepare", _config(path, tmp_path)) == EXIT_DATA
        err = capsys.readouterr().err
        assert err.startswith("ParseError in orquestra.gamboost.data")
        assert "perhaps" in err

    def test_numerical_failure(self, survey_csv, tmp_path, monkeypatch, capsys):
        def failing_stage(cfg):
            raise NumericalError("Iteration 1: every fit failed.")

        monkeypatch.setitem(STAGES, "fit", failing_stage)
        assert run("fit", _config(survey_csv, tmp_path)) == EXIT_NUMERICAL
        assert "NumericalError" in capsys.readouterr().err


class TestMain:
    def _write_config(self, survey_csv, tmp_path, **changes):
        document = {**_config(survey_csv, tmp_path / "out").to_dict(), **changes}
        save_generic_dict(document, tmp_path / "config.json")
        return str(tmp_path / "config.json")

    def test_prepare_through_command_line(self, survey_csv, tmp_path):
        config = self._write_config(survey_csv, tmp_path)
        out = tmp_path / "elsewhere"
        assert main(["prepare", "--config", config, "--out", str(out)]) == EXIT_OK
        assert (out / "cleaned.csv").is_file()

    def test_invalid_configuration_exits_with_2(self, survey_csv, tmp_path, capsys):
        config = self._write_config(survey_csv, tmp_path, boosting={"nu": 2.0})
        assert main(["fit", "--config", config]) == EXIT_CONFIGURATION
        assert "ConfigurationError" in capsys.readouterr().err

    def test_unknown_subcommand_is_rejected(self, survey_csv, tmp_path):
        config = self._write_config(survey_csv, tmp_path)
        with pytest.raises(SystemExit):
            main(["plot", "--config", config])
