import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from misid_richness.adjustment import AdjustedCounts
from misid_richness.estimators import (
    Branch,
    Method,
    adjusted_estimator,
    adjusted_point_vec,
    chao2,
    chao2_point_vec,
    chao2_se,
    chao2_variance,
    cov_q1_q2,
    jackknife1,
    ratio_expansion,
    taylor_correction,
    var_count,
)


def test_chao2_values():
    assert chao2(74, 19, 9, 12).point == pytest.approx(92.4, abs=0.05)
    assert chao2(50, 0, 5, 10).point == 50
    assert chao2(85.2, 15.3, 17.3, 5).point == pytest.approx(90.6125, abs=1e-4)
    assert chao2(74, 19, 9, 12).method is Method.CHAO2


def test_chao2_without_doubletons():
    # bias-corrected surrogate Q1 (Q1 - 1) / 2
    assert chao2(20, 6, 0, 4).point == pytest.approx(20 + 0.75 * 15)
    assert chao2(20, 1, 0, 4).point == 20


def test_chao2_standard_error_weed():
    assert chao2_se(74, 19, 9, 12) == pytest.approx(11.27, abs=0.005)


def test_chao2_variance_no_doubletons_nonnegative():
    assert chao2_variance(20, 6, 0, 4) >= 0
    assert chao2_variance(20, 0, 0, 4) == 0


def test_jackknife_values():
    assert jackknife1(83.6, 24.1, 12).point == pytest.approx(105.6917, abs=1e-4)
    assert jackknife1(10, 0, 5).point == 10
    assert jackknife1(96.1, 4.3, 20).point == pytest.approx(100.185, abs=1e-9)


def test_adjusted_values():
    est = adjusted_estimator(AdjustedCounts(83.6, 24.08, 10.58, 12))
    assert est.point == pytest.approx(105.4, abs=0.1)
    assert est.branch is Branch.TAYLOR_CORRECTED
    assert adjusted_estimator(AdjustedCounts(50, 0, 7, 10)).point == 50
    fallback = adjusted_estimator(AdjustedCounts(60, 8, 0.5, 10))
    assert fallback.point == pytest.approx(67.2)
    assert fallback.branch is Branch.JACKKNIFE_FALLBACK


@pytest.mark.parametrize("q2, branch", [
    (0.0, Branch.JACKKNIFE_FALLBACK),
    (1.0, Branch.JACKKNIFE_FALLBACK),
    (np.nextafter(1.0, 2.0), Branch.TAYLOR_CORRECTED),
])
def test_branch_selector(q2, branch):
    assert adjusted_estimator(AdjustedCounts(30, 5, q2, 6)).branch is branch


@pytest.mark.parametrize("bad", [(-1, 0, 0, 5), (5, -1, 0, 5), (5, 1, 1, 1)])
def test_domain_errors(bad):
    with pytest.raises(ValueError):
        chao2(*bad)


def test_taylor_helpers_agree_with_expansion():
    # the second-order expansion of E[Q1^2/(2Q2)] written out by hand
    Q1, Q2, S = 12.0, 7.0, 80.0
    v1, v2, c = Q1 * (1 - Q1 / S), Q2 * (1 - Q2 / S), -Q1 * Q2 / S
    hand = Q1**2 / (2 * Q2) + v1 / (2 * Q2) - Q1 * c / Q2**2 + Q1**2 * v2 / (2 * Q2**3)
    assert ratio_expansion(Q1, Q2, S) == pytest.approx(hand, rel=1e-14)
    assert var_count(Q1, S) == pytest.approx(v1) and cov_q1_q2(Q1, Q2, S) == pytest.approx(c)
    assert taylor_correction(Q1, Q2) == pytest.approx(
        Q1**2 / (2 * Q2) - Q1 / (2 * Q2) - Q1**2 / (2 * Q2**2))


adjusted_counts = st.tuples(
    st.floats(0, 300), st.floats(0, 1), st.floats(0, 1), st.integers(2, 40)
).map(lambda t: AdjustedCounts(t[0], t[0] * t[1], t[0] * t[2], t[3]))


@settings(max_examples=400, deadline=None)
@given(adjusted_counts)
def test_adjusted_at_least_observed(adj):
    assert adjusted_estimator(adj).point >= adj.S_obs_a


@settings(max_examples=400, deadline=None)
@given(adjusted_counts)
def test_adjusted_not_above_chao2_on_raw_counts(adj):
    assume(adj.Q2_a > 1)
    assert adjusted_estimator(adj).point <= chao2(adj.S_obs_a, adj.Q1_a, adj.Q2_a, adj.T).point


@settings(max_examples=200, deadline=None)
@given(st.lists(adjusted_counts, min_size=1, max_size=20), st.integers(2, 40))
def test_vectorized_matches_scalar(items, T):
    S = [a.S_obs_a for a in items]
    Q1 = [a.Q1_a for a in items]
    Q2 = [a.Q2_a for a in items]
    vec = adjusted_point_vec(S, Q1, Q2, T)
    vec_c = chao2_point_vec(S, Q1, Q2, T)
    for i, a in enumerate(items):
        assert vec[i] == pytest.approx(adjusted_estimator(AdjustedCounts(a.S_obs_a, a.Q1_a, a.Q2_a, T)).point)
        assert vec_c[i] == pytest.approx(chao2(a.S_obs_a, a.Q1_a, a.Q2_a, T).point)
