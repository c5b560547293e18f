################################################################################
# © Copyright 2022 Zapata Computing Inc.
################################################################################
import io

import numpy as np
import pytest

from orquestra.gamboost.baselearners import build_term_set
from orquestra.gamboost.errors import ConfigurationError
from orquestra.gamboost.selection import save_stability_report, stability_select
from orquestra.gamboost.testing import TruthSpec, gen_probit_data, truth_formula

SPEC = TruthSpec(
    400,
    linear_effects={"x": 1.5},
    categorical_effects={"c": 1.0},
    n_noise=4,
    seed=31,
)
FORMULA = truth_formula(SPEC)


@pytest.fixture(scope="module")
def data():
    return gen_probit_data(SPEC)[0]


@pytest.fixture(scope="module")
def learners(data):
    return build_term_set(FORMULA, data)


def _select(data, learners, **kwargs):
    settings = dict(n_replicates=6, q=3, m_max=200, seed=4, learners=learners)
    settings.update(kwargs)
    return stability_select(FORMULA, data, **settings)


@pytest.fixture(scope="module")
def report(data, learners):
    return _select(data, learners)


class TestStabilitySelect:
    def test_intercept_is_not_selectable(self, report):
        assert report.learner_ids == (
            "x",
            "noise_1",
            "noise_2",
            "noise_3",
            "noise_4",
            "c",
        )
        assert report.p == 6

    def test_frequencies_are_shares_of_replicates(self, report):
        assert report.n_replicates == 6
        for frequency in report.frequencies.values():
            assert 0 <= frequency <= 1
            assert (frequency * 6) == pytest.approx(round(frequency * 6))

    def test_each_replicate_selects_at_most_q_learners(self, report):
        assert np.all(report.selections.sum(axis=1) <= report.q)
        assert report.selections.sum() <= report.n_replicates * report.q

    def test_planted_effects_are_stable(self, report):
        assert {"x", "c"} <= set(report.stable_set)

    def test_stable_set_shrinks_with_threshold(self, report):
        assert set(report.stable_at(1.0)) <= set(report.stable_at(0.8))
        assert set(report.stable_at(0.8)) <= set(report.stable_at(0.6))

    def test_frequencies_grow_with_q(self, data, learners, report):
        larger = _select(data, learners, q=5)
        for learner_id, frequency in report.frequencies.items():
            assert larger.frequencies[learner_id] >= frequency

    def test_same_seed_gives_identical_frequencies(self, data, learners, report):
        np.testing.assert_array_equal(
            _select(data, learners).selections, report.selections
        )

    def test_parallel_workers_give_identical_frequencies(
        self, data, learners, report
    ):
        np.testing.assert_array_equal(
            _select(data, learners, n_jobs=2).selections, report.selections
        )

    def test_pfer_bound(self, report):
        assert report.pfer_bound == pytest.approx(9 / (0.6 * 6))
        assert report.summary()["pfer_bound"] == report.pfer_bound

    @pytest.mark.parametrize("q", [0, 7])
    def test_q_outside_of_learner_count_raises(self, data, learners, q):
        with pytest.raises(ConfigurationError, match="q must be"):
            _select(data, learners, q=q)

    @pytest.mark.parametrize("threshold", [0.5, 1.2])
    def test_invalid_threshold_raises(self, data, learners, threshold):
        with pytest.raises(ConfigurationError, match="Threshold"):
            _select(data, learners, threshold=threshold)

    def test_report_csv(self, report):
        buffer = io.StringIO()
        save_stability_report(report, buffer)
        lines = buffer.getvalue().splitlines()
        assert lines[0] == "learner_id,term_id,frequency,stable"
        assert len(lines) == 7


@pytest.mark.slow
def test_planted_support_is_recovered_across_seeds():
    recovered = 0
    for seed in range(20):
        spec = TruthSpec(
            2000,
            linear_effects={"a": 0.5, "b": -0.5},
            smooth_effects={"s": "sine"},
            n_noise=7,
            seed=seed,
        )
        ds = gen_probit_data(spec)[0]
        formula = truth_formula(spec)
        report = stability_select(
            formula, ds, n_replicates=50, q=5, seed=seed, n_jobs=4
        )
        term_of = dict(zip(report.learner_ids, report.term_ids))
        stable_terms = {term_of[learner_id] for learner_id in report.stable_set}
        recovered += stable_terms == {"a", "b", "s"}
    assert recovered >= 18
