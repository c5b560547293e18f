################################################################################
# © Copyright 2022 Zapata Computing Inc.
################################################################################
import numpy as np
import pandas as pd
import pytest

from orquestra.gamboost.data import (
    ColumnKind,
    ColumnSchema,
    Dataset,
    FilterRule,
    apply_plausibility_filters,
    drop_incomplete_rows,
    remove_outliers_iqr,
    save_rejection_report,
)
from orquestra.gamboost.errors import ConfigurationError

SCHEMA = (
    ColumnSchema("age", ColumnKind.CONTINUOUS),
    ColumnSchema("age_first_sex", ColumnKind.CONTINUOUS),
    ColumnSchema("children", ColumnKind.CONTINUOUS),
    ColumnSchema("married", ColumnKind.CATEGORICAL, ("no", "yes")),
)

AGE_RULE = FilterRule("r1", "first sex after current age", "age_first_sex <= age")


@pytest.fixture
def survey():
    return Dataset.from_arrays(
        SCHEMA,
        {
            "age": [18.0, 30.0, 25.0, 40.0, 50.0],
            "age_first_sex": [20.0, 17.0, None, 22.0, 60.0],
            "children": [0.0, 2.0, 1.0, 3.0, -1.0],
            "married": ["no", "yes", "yes", "no", None],
        },
    )


def _single_column(values):
    schema = (ColumnSchema("x", ColumnKind.CONTINUOUS),)
    return Dataset.from_arrays(schema, {"x": values})


class TestPlausibilityFilters:
    def test_rule_violation_rejects_row(self, survey):
        filtered, report = apply_plausibility_filters(survey, [AGE_RULE])

        np.testing.assert_array_equal(filtered.values("age"), [30.0, 25.0, 40.0])
        assert report.entries[0].rows_rejected == 2

    def test_missing_referenced_value_never_rejects(self, survey):
        filtered, _ = apply_plausibility_filters(survey, [AGE_RULE])
        assert 25.0 in filtered.values("age")

    def test_empty_rule_list_keeps_dataset(self, survey):
        filtered, report = apply_plausibility_filters(survey, [])
        assert filtered.n_rows == survey.n_rows
        assert report.rows_removed == 0

    def test_counts_sum_to_removed_rows(self, survey):
        rules = [
            AGE_RULE,
            FilterRule("r2", "negative children", "children >= 0"),
        ]
        filtered, report = apply_plausibility_filters(survey, rules)

        assert report.rows_removed == 2
        assert sum(entry.rows_rejected for entry in report.entries) == 2
        assert report.entries[1].rows_violating == 1
        assert report.entries[1].rows_rejected == 0
        assert filtered.n_rows + report.rows_removed == survey.n_rows

    def test_categorical_column_evaluates_to_level_code(self, survey):
        rule = FilterRule(
            "r3", "unmarried women with children", "Implies(Eq(married, 0), Eq(children, 0))"
        )
        filtered, report = apply_plausibility_filters(survey, [rule])

        assert report.rows_removed == 1
        np.testing.assert_array_equal(filtered.values("age"), [18.0, 30.0, 25.0, 50.0])

    def test_retained_rows_are_unchanged(self, survey):
        filtered, _ = apply_plausibility_filters(survey, [AGE_RULE])
        for name in survey.column_names:
            np.testing.assert_array_equal(
                filtered.values(name), survey.values(name)[[1, 2, 3]]
            )

    @pytest.mark.parametrize(
        "expression", ["income <= age", "age +", "age + 1"]
    )
    def test_invalid_rules_raise_configuration_error(self, survey, expression):
        with pytest.raises(ConfigurationError):
            apply_plausibility_filters(survey, [FilterRule("bad", "", expression)])

    def test_report_is_saved_as_csv(self, survey, tmp_path):
        _, report = apply_plausibility_filters(survey, [AGE_RULE])
        save_rejection_report(report, tmp_path / "rejections.csv")

        frame = pd.read_csv(tmp_path / "rejections.csv")
        assert list(frame.columns) == ["rule_id", "description", "rows_rejected"]
        assert frame["rows_rejected"].tolist() == [2]


class TestRemoveOutliersIqr:
    def test_far_value_is_removed(self):
        ds = _single_column([float(v) for v in range(1, 11)] + [100.0])
        filtered, report = remove_outliers_iqr(ds, ["x"], 1.5)

        assert filtered.n_rows == 10
        assert 100.0 not in filtered.values("x")
        assert report.entries[0].rule_id == "iqr:x"
        assert report.rows_removed == 1

    def test_constant_column_removes_nothing(self):
        filtered, _ = remove_outliers_iqr(_single_column([3.0] * 6), ["x"])
        assert filtered.n_rows == 6

    def test_huge_multiplier_removes_nothing(self):
        ds = _single_column([float(v) for v in range(1, 11)] + [100.0])
        filtered, _ = remove_outliers_iqr(ds, ["x"], 1e9)
        assert filtered.n_rows == 11

    def test_missing_values_are_kept(self):
        ds = _single_column([1.0, 2.0, None, 3.0, 4.0])
        filtered, _ = remove_outliers_iqr(ds, ["x"])
        assert filtered.n_rows == 5

    def test_fences_are_computed_once(self):
        # 7 lies inside the original fences but outside the fences of the
        # output, so a second pass would remove it.
        values = [1.0, 2.0, 2.0, 2.0, 2.0, 3.0, 7.0, 40.0]
        filtered, report = remove_outliers_iqr(_single_column(values), ["x"])

        assert report.rows_removed == 1
        assert 7.0 in filtered.values("x")

    def test_non_continuous_column_raises_configuration_error(self, survey):
        with pytest.raises(ConfigurationError):
            remove_outliers_iqr(survey, ["married"])

    def test_non_positive_multiplier_raises_configuration_error(self, survey):
        with pytest.raises(ConfigurationError):
            remove_outliers_iqr(survey, ["age"], 0.0)


class TestDropIncompleteRows:
    def test_only_complete_cases_remain(self, survey):
        filtered, report = drop_incomplete_rows(survey)

        assert filtered.is_complete()
        assert filtered.n_rows == 3
        assert report.rows_removed == 2
