################################################################################
# © Copyright 2022 Zapata Computing Inc.
################################################################################
import numpy as np
import pytest

from orquestra.gamboost.errors import ConfigurationError, DomainError
from orquestra.gamboost.selection import (
    ResamplePlan,
    bootstrap_counts,
    subsample_mask,
)

Y = np.array([0.0] * 77 + [1.0] * 23)
W = np.ones(100)


class TestResamplePlan:
    @pytest.mark.parametrize(
        "kwargs",
        [{"n_replicates": 0}, {"fraction": 0.0}, {"fraction": 1.0}],
    )
    def test_invalid_plans_raise_configuration_error(self, kwargs):
        with pytest.raises(ConfigurationError):
            ResamplePlan(**kwargs)

    def test_dict_conversion(self):
        plan = ResamplePlan(7, 0.3, 11, False)
        assert ResamplePlan.from_dict(plan.to_dict()) == plan


class TestSubsampleMask:
    @pytest.mark.parametrize("fraction,size", [(0.5, 50), (0.33, 33), (0.9, 90)])
    def test_subsample_has_floor_of_fraction_rows(self, fraction, size):
        mask = subsample_mask(ResamplePlan(fraction=fraction), Y, W, 0)
        assert mask.dtype == bool
        assert mask.sum() == size

    def test_same_seed_gives_same_rows(self):
        plan = ResamplePlan(seed=5)
        np.testing.assert_array_equal(
            subsample_mask(plan, Y, W, 3), subsample_mask(plan, Y, W, 3)
        )

    def test_replicates_differ(self):
        plan = ResamplePlan(seed=5)
        assert not np.array_equal(
            subsample_mask(plan, Y, W, 0), subsample_mask(plan, Y, W, 1)
        )

    def test_stratified_subsample_keeps_prevalence(self):
        mask = subsample_mask(ResamplePlan(fraction=0.5), Y, W, 0)
        assert Y[mask].sum() in (11, 12)

    def test_both_parts_have_both_classes(self):
        plan = ResamplePlan(fraction=0.5, stratify_by_outcome=False)
        for replicate in range(10):
            mask = subsample_mask(plan, Y, W, replicate)
            assert 0 < Y[mask].sum() < mask.sum()
            assert 0 < Y[~mask].sum() < (~mask).sum()

    def test_single_class_outcome_raises_domain_error(self):
        plan = ResamplePlan(stratify_by_outcome=False)
        with pytest.raises(DomainError, match="redraws"):
            subsample_mask(plan, np.zeros(100), W, 0)


class TestBootstrapCounts:
    def test_counts_add_up_to_sample_size(self):
        counts = bootstrap_counts(Y, W, seed=1, replicate=0)
        assert counts.sum() == len(Y)
        assert np.all(counts >= 0)

    def test_stratified_sample_keeps_class_sizes(self):
        counts = bootstrap_counts(Y, W, seed=1, replicate=4)
        assert counts[Y == 1].sum() == 23

    def test_draws_are_reproducible(self):
        np.testing.assert_array_equal(
            bootstrap_counts(Y, W, seed=2, replicate=7),
            bootstrap_counts(Y, W, seed=2, replicate=7),
        )
        assert not np.array_equal(
            bootstrap_counts(Y, W, seed=2, replicate=7),
            bootstrap_counts(Y, W, seed=2, replicate=8),
        )

    def test_single_class_outcome_raises_domain_error(self):
        with pytest.raises(DomainError):
            bootstrap_counts(np.ones(100), W, seed=1, replicate=0, stratify=False)
