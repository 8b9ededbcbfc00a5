import math

import numpy as np
import pytest

from misid_richness.adjustment import AdjustedCounts
from misid_richness.bootstrap import BootstrapConfig, bootstrap_replicates, bootstrap_se
from misid_richness.estimators import adjusted_estimator

WEED_ADJ = AdjustedCounts(83.6, 24.08, 10.58, 12)


def test_deterministic_given_seed():
    cfg = BootstrapConfig(200, 123)
    assert bootstrap_se(WEED_ADJ, 105.4, cfg) == bootstrap_se(WEED_ADJ, 105.4, cfg)
    assert bootstrap_se(WEED_ADJ, 105.4, cfg) != bootstrap_se(WEED_ADJ, 105.4, BootstrapConfig(200, 124))


def test_degenerate_binomials():
    adj = AdjustedCounts(50.0, 0.0, 0.0, 10)
    assert bootstrap_se(adj, 50.0, BootstrapConfig(50, 1)) == 0.0


def test_only_observed_varies_without_rare_species():
    adj = AdjustedCounts(40.0, 0.0, 0.0, 10)
    counts, est = bootstrap_replicates(adj, 50.0, BootstrapConfig(300, 3))
    assert np.all(counts[:, 1:] == 0)
    assert np.array_equal(est, counts[:, 0].astype(float))
    assert bootstrap_se(adj, 50.0, BootstrapConfig(300, 3)) > 0


def test_replicates_use_adjusted_estimator():
    counts, est = bootstrap_replicates(WEED_ADJ, 105.4, BootstrapConfig(20, 9))
    for (s, q1, q2), v in zip(counts, est):
        assert v == pytest.approx(adjusted_estimator(AdjustedCounts(s, q1, q2, 12)).point)


def test_replicate_means_preserved():
    cfg = BootstrapConfig(20_000, 5)
    counts, _ = bootstrap_replicates(WEED_ADJ, 105.4, cfg)
    N = round(105.4)
    for j, value in enumerate((WEED_ADJ.S_obs_a, WEED_ADJ.Q1_a, WEED_ADJ.Q2_a)):
        p = value / 105.4
        se = math.sqrt(N * p * (1 - p) / cfg.trials)
        assert abs(counts[:, j].mean() - N * p) < 3 * se


def test_scaling_with_counts():
    cfg = BootstrapConfig(400, 77)
    base = bootstrap_se(WEED_ADJ, 105.4, cfg)
    doubled = AdjustedCounts(2 * 83.6, 2 * 24.08, 2 * 10.58, 12)
    ratio = bootstrap_se(doubled, 210.8, cfg) / base
    assert 1.0 <= ratio <= 3.0


def test_se_nonnegative_and_config_validation():
    assert bootstrap_se(WEED_ADJ, 105.4, BootstrapConfig(2, 0)) >= 0
    with pytest.raises(ValueError):
        BootstrapConfig(1, 0)
    with pytest.raises(ValueError):
        BootstrapConfig(10, -1)


def test_probability_out_of_range():
    with pytest.raises(ValueError):
        bootstrap_se(AdjustedCounts(10, 12, 0, 5), 11.0, BootstrapConfig())
    with pytest.raises(ValueError):
        bootstrap_se(WEED_ADJ, 50.0, BootstrapConfig())


def test_explicit_generator_is_used():
    cfg = BootstrapConfig(100, 0)
    a = bootstrap_se(WEED_ADJ, 105.4, cfg, np.random.default_rng(42))
    b = bootstrap_se(WEED_ADJ, 105.4, cfg, np.random.default_rng(42))
    assert a == b
