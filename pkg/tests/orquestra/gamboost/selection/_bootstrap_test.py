################################################################################
# © Copyright 2022 Zapata Computing Inc.
################################################################################
import io

import numpy as np
import pytest

from orquestra.gamboost.boosting import coefficient_table, fit, partial_effect
from orquestra.gamboost.errors import ConfigurationError
from orquestra.gamboost.selection import (
    OFFSET_KEY,
    BootstrapRun,
    ResamplePlan,
    bootstrap_bands,
    coefficient_bands,
    default_band_terms,
    effect_bands,
    run_bootstrap,
    save_partial_effect,
    tune_mstop,
)
from orquestra.gamboost.testing import TruthSpec, gen_probit_data, truth_formula

SPEC = TruthSpec(
    300,
    linear_effects={"x": 1.0},
    smooth_effects={"s": "sine"},
    categorical_effects={"c": 0.7},
    n_noise=1,
    seed=41,
)
FORMULA = truth_formula(SPEC)


@pytest.fixture(scope="module")
def data():
    return gen_probit_data(SPEC)[0]


@pytest.fixture(scope="module")
def model(data):
    return fit(FORMULA, data, m_stop=40)


@pytest.fixture(scope="module")
def run(model, data):
    return run_bootstrap(model, data, n_replicates=20, seed=3)


class TestRunBootstrap:
    def test_one_coefficient_set_per_replicate(self, run, model):
        assert run.n_replicates == 20
        assert run.intercepts.shape == (20,)
        assert run.m_stop == model.m_stop
        assert set(run.coefficients[0]) == set(model.coefficients)

    def test_same_seed_gives_identical_replicates(self, run, model, data):
        again = run_bootstrap(model, data, n_replicates=20, seed=3)
        np.testing.assert_array_equal(again.intercepts, run.intercepts)
        for first, second in zip(again.coefficients, run.coefficients):
            for learner_id in first:
                np.testing.assert_array_equal(first[learner_id], second[learner_id])

    def test_parallel_workers_give_identical_replicates(self, run, model, data):
        parallel = run_bootstrap(model, data, n_replicates=20, seed=3, n_jobs=2)
        np.testing.assert_array_equal(parallel.intercepts, run.intercepts)

    def test_replicates_differ(self, run):
        assert len(set(run.intercepts.tolist())) > 1


class TestEffectBands:
    def test_estimate_is_full_data_partial_effect(self, model, run):
        (effect,) = effect_bands(model, run, ["s"])
        np.testing.assert_array_equal(
            effect.estimate, partial_effect(model, "s").estimate
        )
        assert effect.has_band
        assert np.all(effect.lower <= effect.upper)

    def test_categorical_band_has_one_entry_per_level(self, model, run):
        (effect,) = effect_bands(model, run, ["c"])
        assert list(effect.grid) == ["no", "yes"]
        assert effect.lower[0] == effect.upper[0] == 0

    def test_wider_level_contains_narrower_band(self, model, run):
        (narrow,) = effect_bands(model, run, ["x"], level=0.95)
        (wide,) = effect_bands(model, run, ["x"], level=0.99)
        assert np.all(wide.lower <= narrow.lower)
        assert np.all(wide.upper >= narrow.upper)
        assert wide.level == 0.99

    def test_learner_without_coefficients_has_zero_band(self, model, run):
        zeroed = BootstrapRun(
            tuple(
                {**coefficients, "noise_1": np.zeros(1)}
                for coefficients in run.coefficients
            ),
            run.intercepts,
            run.m_stop,
        )
        (effect,) = effect_bands(model, zeroed, ["noise_1"])
        np.testing.assert_array_equal(effect.lower, np.zeros(50))
        np.testing.assert_array_equal(effect.upper, np.zeros(50))

    def test_custom_grid(self, model, run):
        (effect,) = effect_bands(model, run, ["x"], grids={"x": [-0.5, 0.0, 0.5]})
        np.testing.assert_array_equal(effect.grid, [-0.5, 0.0, 0.5])

    @pytest.mark.parametrize("level", [0.0, 1.0])
    def test_invalid_level_raises(self, model, run, level):
        with pytest.raises(ConfigurationError):
            effect_bands(model, run, ["x"], level=level)

    def test_partial_effect_csv(self, model, run):
        (effect,) = effect_bands(model, run, ["x"])
        buffer = io.StringIO()
        save_partial_effect(effect, buffer)
        lines = buffer.getvalue().splitlines()
        assert lines[0] == "x,estimate,lower,upper"
        assert len(lines) == 51


class TestCoefficientBands:
    def test_bands_cover_intercept_and_every_learner(self, run, model):
        bands = coefficient_bands(run)
        assert set(bands) == {OFFSET_KEY} | set(model.coefficients)
        for low, high in bands.values():
            assert np.all(low <= high)

    def test_coefficient_table_carries_limits(self, run, model):
        table = coefficient_table(model, coefficient_bands(run))
        assert not table["ci_low"].isna().any()
        assert np.all(table["ci_low"] <= table["ci_high"])


class TestBootstrapBands:
    def test_reports_every_term_by_default(self, data):
        effects = bootstrap_bands(FORMULA, data, m_star=10, n_replicates=5, seed=1)
        assert [effect.term_id for effect in effects] == ["x", "noise_1", "s", "c"]

    def test_restricted_to_requested_terms(self, data):
        effects = bootstrap_bands(
            FORMULA, data, m_star=10, n_replicates=5, term_ids=["s"]
        )
        assert [effect.term_id for effect in effects] == ["s"]


def test_default_band_terms_follow_stable_learners(model):
    assert default_band_terms(model, ["s:smooth", "c"]) == ["s", "c"]
    assert default_band_terms(model) == ["x", "noise_1", "s", "c"]


@pytest.mark.slow
def test_band_at_grid_midpoint_covers_planted_linear_effect():
    covered = 0
    for seed in range(20):
        spec = TruthSpec(2000, linear_effects={"x": 0.3}, seed=seed)
        ds = gen_probit_data(spec)[0]
        formula = truth_formula(spec)
        m_star = tune_mstop(formula, ds, ResamplePlan(seed=seed), m_max=300).m_star
        (effect,) = bootstrap_bands(
            formula, ds, m_star, n_replicates=200, term_ids=["x"], seed=seed, n_jobs=4
        )
        middle = len(effect.grid) // 2
        center = np.average(ds.values("x"), weights=ds.weights)
        planted = 0.3 * (effect.grid[middle] - center)
        covered += bool(effect.lower[middle] <= planted <= effect.upper[middle])
    assert covered >= 18
