################################################################################
# © Copyright 2022 Zapata Computing Inc.
################################################################################
import numpy as np
import pytest

from orquestra.gamboost.data import ColumnKind, ColumnSchema, Dataset
from orquestra.gamboost.errors import ConfigurationError, DomainError
from orquestra.gamboost.imputation import (
    ImputationConfig,
    nearest_donors,
    pmm_impute,
    run_pmm,
    save_imputation_log,
)

SCHEMA = (
    ColumnSchema("x", ColumnKind.CONTINUOUS),
    ColumnSchema("y", ColumnKind.CONTINUOUS),
    ColumnSchema("group", ColumnKind.CATEGORICAL, ("a", "b", "c")),
    ColumnSchema("w", ColumnKind.WEIGHT),
)


@pytest.fixture
def survey():
    rng = np.random.default_rng(7)
    n = 1000
    x = rng.normal(size=n)
    y = np.round(2 * x + rng.normal(scale=0.5, size=n), 2)
    group = np.array(["a", "b", "c"])[(x > -0.5).astype(int) + (x > 0.5).astype(int)]
    missing_y = rng.random(n) < 0.2
    missing_group = rng.random(n) < 0.2
    return Dataset.from_arrays(
        SCHEMA,
        {
            "x": x,
            "y": np.where(missing_y, np.nan, y),
            "group": [None if m else g for m, g in zip(missing_group, group)],
            "w": rng.uniform(0.5, 2.0, size=n),
        },
    )


class TestPmmImpute:
    def test_complete_dataset_is_returned_unchanged(self):
        ds = Dataset.from_arrays(SCHEMA[:2], {"x": [1.0, 2.0], "y": [3.0, 4.0]})
        assert pmm_impute(ds, ImputationConfig()) is ds

    def test_output_has_no_missing_cells(self, survey):
        assert pmm_impute(survey, ImputationConfig()).is_complete()

    def test_imputed_values_are_observed_values(self, survey):
        imputed = pmm_impute(survey, ImputationConfig())

        observed_y = set(survey.values("y")[~survey.missing("y")])
        assert set(imputed.values("y")) <= observed_y
        observed_groups = set(survey.labels("group")) - {None}
        assert set(imputed.labels("group")) <= observed_groups

    def test_observed_cells_are_not_modified(self, survey):
        imputed = pmm_impute(survey, ImputationConfig())
        for name in survey.column_names:
            observed = ~survey.missing(name)
            np.testing.assert_array_equal(
                imputed.values(name)[observed], survey.values(name)[observed]
            )

    def test_same_seed_gives_identical_output(self, survey):
        first = pmm_impute(survey, ImputationConfig(seed=3))
        second = pmm_impute(survey, ImputationConfig(seed=3))
        for name in survey.column_names:
            np.testing.assert_array_equal(first.values(name), second.values(name))

    def test_single_donor_is_forced(self):
        ds = Dataset.from_arrays(
            SCHEMA[:2], {"x": [1.0, 2.0], "y": [5.0, None]}
        )
        imputed = pmm_impute(ds, ImputationConfig(donor_pool_size=1))
        assert imputed.values("y")[1] == 5.0

    def test_closest_predicted_mean_is_donor(self):
        ds = Dataset.from_arrays(
            SCHEMA[:2],
            {"x": [1.0, 2.0, 3.0, 4.0, 3.0], "y": [2.0, 4.0, 6.0, 8.0, None]},
        )
        imputed = pmm_impute(ds, ImputationConfig(donor_pool_size=1))
        assert imputed.values("y")[4] == 6.0

    def test_too_few_donors_raise_domain_error(self):
        ds = Dataset.from_arrays(
            SCHEMA[:2], {"x": [1.0, 2.0, 3.0], "y": [1.0, None, None]}
        )
        with pytest.raises(DomainError, match="'y'"):
            pmm_impute(ds, ImputationConfig(donor_pool_size=2))

    def test_predictor_sets_restrict_regression(self, survey):
        cfg = ImputationConfig(predictor_sets={"y": ("x",), "group": ("x",)})
        assert pmm_impute(survey, cfg).is_complete()

    def test_unknown_predictor_raises_configuration_error(self, survey):
        with pytest.raises(ConfigurationError):
            pmm_impute(survey, ImputationConfig(predictor_sets={"y": ("income",)}))


class TestImputationRunLog:
    def test_log_counts_imputed_cells(self, survey, tmp_path):
        _, run_log = run_pmm(survey, ImputationConfig())

        assert run_log.imputed_counts == {
            "y": int(survey.missing("y").sum()),
            "group": int(survey.missing("group").sum()),
        }
        assert run_log.fallbacks == []

        save_imputation_log(run_log, tmp_path / "imputation_log.txt")
        text = (tmp_path / "imputation_log.txt").read_text()
        assert f"y: {run_log.imputed_counts['y']}" in text


class TestImputationConfig:
    @pytest.mark.parametrize("kwargs", [{"donor_pool_size": 0}, {"n_cycles": 0}])
    def test_invalid_settings_raise_configuration_error(self, kwargs):
        with pytest.raises(ConfigurationError):
            ImputationConfig(**kwargs)

    def test_dict_conversion(self):
        cfg = ImputationConfig(3, 2, 11, {"y": ("x",)})
        assert ImputationConfig.from_dict(cfg.to_dict()) == cfg


@pytest.mark.parametrize(
    "distances,k,expected",
    [
        ([3.0, 1.0, 2.0], 2, [1, 2]),
        ([1.0, 0.0, 1.0, 1.0], 2, [1, 0]),
        ([1.0, 2.0], 5, [0, 1]),
    ],
)
def test_nearest_donors_breaks_ties_by_position(distances, k, expected):
    np.testing.assert_array_equal(nearest_donors(np.array(distances), k), expected)
