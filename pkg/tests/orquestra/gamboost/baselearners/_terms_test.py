################################################################################
# © Copyright 2022 Zapata Computing Inc.
################################################################################
import numpy as np
import pytest

from orquestra.gamboost.baselearners import (
    INTERCEPT_ID,
    LearnerKind,
    ModelFormula,
    TermKind,
    TermSpec,
    build_term_set,
    effective_df,
    fit_penalized_ls,
    outcome_vector,
)
from orquestra.gamboost.data import ColumnKind, ColumnSchema, Dataset
from orquestra.gamboost.errors import ConfigurationError, DataError

STATES = tuple(f"s{i:02d}" for i in range(32))

SCHEMA = (
    ColumnSchema("y", ColumnKind.CATEGORICAL, ("no", "yes")),
    ColumnSchema("sex", ColumnKind.CATEGORICAL, ("female", "male")),
    ColumnSchema(
        "region", ColumnKind.CATEGORICAL, ("north", "center", "south", "west")
    ),
    ColumnSchema("age", ColumnKind.CONTINUOUS),
    ColumnSchema("income", ColumnKind.CONTINUOUS),
    ColumnSchema("lon", ColumnKind.COORDINATE),
    ColumnSchema("lat", ColumnKind.COORDINATE),
    ColumnSchema("state", ColumnKind.IDENTIFIER),
    ColumnSchema("w", ColumnKind.WEIGHT),
)


@pytest.fixture(scope="module")
def survey():
    rng = np.random.default_rng(2022)
    n = 600
    return Dataset.from_arrays(
        SCHEMA,
        {
            "y": rng.choice(["no", "yes"], size=n),
            "sex": rng.choice(["female", "male"], size=n),
            "region": rng.choice(["north", "center", "south", "west"], size=n),
            "age": rng.uniform(15, 49, size=n),
            "income": rng.lognormal(size=n),
            "lon": rng.uniform(-117, -86, size=n),
            "lat": rng.uniform(14, 33, size=n),
            "state": np.array(STATES)[np.arange(n) % 32],
            "w": rng.uniform(0.5, 3.0, size=n),
        },
    )


def _by_id(learners):
    return {learner.learner_id: learner for learner in learners}


class TestBuildTermSet:
    def test_categorical_and_smooth_terms_give_four_learners(self, survey):
        formula = ModelFormula(
            "y",
            (
                TermSpec("sex", TermKind.CATEGORICAL, ("sex",)),
                TermSpec("age", TermKind.SMOOTH, ("age",)),
            ),
        )
        learners = build_term_set(formula, survey)

        assert [learner.learner_id for learner in learners] == [
            INTERCEPT_ID,
            "sex",
            "age:linear",
            "age:smooth",
        ]
        assert learners[3].kind == LearnerKind.SMOOTH_NONLINEAR
        assert learners[3].n_coefficients == 22

    def test_small_dummy_blocks_are_unpenalized(self, survey):
        formula = ModelFormula(
            "y", (TermSpec("sex", TermKind.CATEGORICAL, ("sex",)),), intercept=False
        )
        (learner,) = build_term_set(formula, survey)

        assert learner.lam == 0.0
        assert learner.df_target is None

    def test_large_dummy_blocks_are_ridge_penalized(self, survey):
        formula = ModelFormula(
            "y", (TermSpec("region", TermKind.CATEGORICAL, ("region",)),)
        )
        learner = _by_id(build_term_set(formula, survey))["region"]

        assert learner.n_coefficients == 3
        assert learner.lam > 0
        w = survey.weights / survey.weights.mean()
        assert effective_df(learner, w) == pytest.approx(1.0, abs=1e-6)

    def test_spatial_term_has_tensor_width(self, survey):
        formula = ModelFormula(
            "y", (TermSpec("space", TermKind.SPATIAL, ("lon", "lat")),)
        )
        learner = _by_id(build_term_set(formula, survey))["space"]

        assert learner.kind == LearnerKind.SPATIAL_SURFACE
        assert learner.n_coefficients == 22**2
        np.testing.assert_allclose(
            survey.weights @ learner.training_design(), 0.0, atol=1e-8
        )

    def test_random_intercept_has_one_column_per_state(self, survey):
        formula = ModelFormula("y", (TermSpec("state", TermKind.RANDOM, ("state",)),))
        learner = _by_id(build_term_set(formula, survey))["state"]

        assert learner.n_coefficients == 32
        np.testing.assert_array_equal(learner.penalty.matrix, np.eye(32))

    def test_penalized_learners_reach_requested_df(self, survey):
        formula = ModelFormula(
            "y",
            (
                TermSpec("age", TermKind.SMOOTH, ("age",)),
                TermSpec("inc", TermKind.INTERACTION, ("income",), by="sex"),
                TermSpec("space", TermKind.SPATIAL, ("lon", "lat")),
                TermSpec("state", TermKind.RANDOM, ("state",)),
            ),
        )
        w = survey.weights / survey.weights.mean()
        penalized = [
            learner for learner in build_term_set(formula, survey) if learner.df_target
        ]

        assert len(penalized) == 4
        for learner in penalized:
            assert effective_df(learner, w) == pytest.approx(1.0, abs=1e-6)

    def test_scaled_weights_give_same_penalties(self, survey):
        formula = ModelFormula("y", (TermSpec("age", TermKind.SMOOTH, ("age",)),))
        first = build_term_set(formula, survey)
        second = build_term_set(formula, survey, 7.0 * survey.weights)

        for a, b in zip(first, second):
            assert a.lam == pytest.approx(b.lam, rel=1e-8)

    def test_interaction_is_zero_outside_of_modifier_level(self, survey):
        formula = ModelFormula(
            "y", (TermSpec("inc", TermKind.INTERACTION, ("income",), by="sex"),)
        )
        learners = _by_id(build_term_set(formula, survey))
        female = survey.labels("sex") == "female"

        for learner_id in ("inc:linear", "inc:smooth"):
            design = learners[learner_id].training_design()
            assert np.all(design[female] == 0.0)
            assert learners[learner_id].kind.value.startswith("varying-coefficient")

    def test_multilevel_modifier_needs_level(self, survey):
        formula = ModelFormula(
            "y", (TermSpec("inc", TermKind.INTERACTION, ("income",), by="region"),)
        )
        with pytest.raises(ConfigurationError, match="by_level"):
            build_term_set(formula, survey)

    def test_continuous_modifier_is_rejected(self, survey):
        formula = ModelFormula(
            "y", (TermSpec("inc", TermKind.INTERACTION, ("income",), by="age"),)
        )
        with pytest.raises(ConfigurationError):
            build_term_set(formula, survey)

    def test_unknown_column_is_rejected(self, survey):
        formula = ModelFormula("y", (TermSpec("h", TermKind.LINEAR, ("height",)),))
        with pytest.raises(ConfigurationError, match="height"):
            build_term_set(formula, survey)

    def test_missing_values_are_rejected(self, survey):
        ds = survey.with_columns({"age": np.where(np.arange(600) == 5, np.nan, 30.0)})
        formula = ModelFormula("y", (TermSpec("age", TermKind.LINEAR, ("age",)),))
        with pytest.raises(DataError):
            build_term_set(formula, ds)

    def test_heavily_penalized_nonlinear_part_fits_zero(self):
        rng = np.random.default_rng(8)
        schema = (
            ColumnSchema("y", ColumnKind.CATEGORICAL, ("0", "1")),
            ColumnSchema("x", ColumnKind.CONTINUOUS),
        )
        x = rng.uniform(0, 1, size=30)
        ds = Dataset.from_arrays(schema, {"y": ["0", "1"] * 15, "x": x})
        formula = ModelFormula(
            "y", (TermSpec("x", TermKind.SMOOTH, ("x",)),), inner_knots=3
        )
        learner = _by_id(build_term_set(formula, ds))["x:smooth"]

        result = fit_penalized_ls(
            learner.with_lambda(1e10), np.sin(6 * x), np.ones(30)
        )
        assert np.abs(result.fitted).max() < 1e-6


class TestFormula:
    def test_outcome_codes_non_reference_level(self, survey):
        y = outcome_vector(ModelFormula("y", ()), survey)
        np.testing.assert_array_equal(y, (survey.labels("y") == "yes").astype(float))

    def test_outcome_must_be_binary(self, survey):
        with pytest.raises(ConfigurationError):
            outcome_vector(ModelFormula("region", ()), survey)

    def test_duplicated_term_ids_are_rejected(self):
        term = TermSpec("age", TermKind.LINEAR, ("age",))
        with pytest.raises(ConfigurationError, match="Duplicated"):
            ModelFormula("y", (term, term))

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"term_id": "a:b", "kind": "linear", "columns": ("age",)},
            {"term_id": "s", "kind": "surface", "columns": ("age",)},
            {"term_id": "i", "kind": "interaction", "columns": ("age",)},
            {"term_id": "l", "kind": "linear", "columns": ("age",), "by": "sex"},
            {"term_id": "l", "kind": "linear", "columns": ("age",), "df": 0.0},
        ],
    )
    def test_invalid_terms_are_rejected(self, kwargs):
        with pytest.raises(ConfigurationError):
            TermSpec(**kwargs)

    def test_formula_survives_dict_conversion(self):
        formula = ModelFormula(
            "y",
            (
                TermSpec("age", TermKind.SMOOTH, ("age",), label="Age", df=2.0),
                TermSpec("inc", TermKind.INTERACTION, ("income",), by="sex"),
            ),
            inner_knots=10,
        )
        assert ModelFormula.from_dict(formula.to_dict()) == formula
