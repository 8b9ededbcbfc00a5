import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq, fsolve

from misid_richness.calibration import (
    BoundaryFlag,
    CalibrationRecord,
    estimate_error_rates,
    expected_f_sub0,
    expected_S_sub_e,
)
from misid_richness.simulator import ErrorModel, simulate_calibration


def test_expected_f_sub0_values():
    assert expected_f_sub0(40, 0, 0.5) == 0
    assert expected_f_sub0(40, 0.14, 0.82) == pytest.approx(1.008, abs=1e-12)
    assert expected_f_sub0(40, 0.2, 1.0) == 0


def test_expected_S_sub_e_values():
    assert expected_S_sub_e(40, 0, 0.9) == 40
    assert expected_S_sub_e(40, 0.14, 0.82) == pytest.approx(35.0, abs=0.05)


@pytest.mark.parametrize("args", [(40, -0.1, 0.5), (40, 0.1, 1.5), (0, 0.1, 0.5)])
def test_forward_domain_errors(args):
    with pytest.raises(ValueError):
        expected_f_sub0(*args)


def test_expected_S_sub_e_denominator():
    with pytest.raises(ValueError):
        expected_S_sub_e(1, 0.5, 1.0)


def test_forward_small_subplot_against_simulation():
    S_sub, e, r, n = 5, 0.15, 0.91, 100_000
    em = ErrorModel(e, "constant", r)
    rng = np.random.default_rng(5)
    draws = np.array([
        (rec.S_sub_e, rec.f_sub_0)
        for rec in (simulate_calibration(S_sub, em, rng) for _ in range(n))
    ], dtype=float)
    mean = draws.mean(axis=0)
    se = draws.std(axis=0, ddof=1) / math.sqrt(n)
    assert abs(mean[0] - expected_S_sub_e(S_sub, e, r)) < 3 * se[0]
    assert abs(mean[1] - expected_f_sub0(S_sub, e, r)) < 3 * se[1]


def test_weed_calibration():
    est = estimate_error_rates(CalibrationRecord(40, 35, 1))
    assert est.boundary_flag is BoundaryFlag.INTERIOR
    assert est.e_bar == pytest.approx(0.14, abs=0.005)
    assert est.r == pytest.approx(0.82, abs=0.005)
    assert est.residual < 1e-8


def test_weed_calibration_matches_generic_solver():
    # independent 2-D Newton-type solve of both equations
    def eqs(x):
        e, r = x
        return [expected_f_sub0(40, e, r) - 1, expected_S_sub_e(40, e, r) - 35]

    e_ref, r_ref = fsolve(eqs, [0.1, 0.5], xtol=1e-14)
    est = estimate_error_rates(CalibrationRecord(40, 35, 1))
    assert est.e_bar == pytest.approx(e_ref, abs=1e-9)
    assert est.r == pytest.approx(r_ref, abs=1e-9)


def test_perfect_inventory():
    est = estimate_error_rates(CalibrationRecord(40, 40, 0))
    assert (est.e_bar, est.r, est.boundary_flag) == (0.0, 0.0, BoundaryFlag.ZERO_ERROR)


def test_r_pinned_at_one():
    est = estimate_error_rates(CalibrationRecord(40, 36, 0))
    e_ref = brentq(lambda e: e * (1 - e / 39) ** 39 - 0.1, 0, 0.5, xtol=1e-15)
    assert est.boundary_flag is BoundaryFlag.R_PINNED_AT_ONE
    assert est.r == 1.0
    assert est.e_bar == pytest.approx(e_ref, abs=1e-10)
    assert est.residual < 1e-8


def test_inconsistent_record_is_clamped():
    # no species missing, yet three unknown names: no (e_bar, r) fits
    est = estimate_error_rates(CalibrationRecord(40, 40, 3))
    assert est.boundary_flag is BoundaryFlag.NO_SOLUTION_CLAMPED
    assert 0 <= est.e_bar <= 1 and 0 <= est.r <= 1
    assert est.residual > 0


def test_record_validation():
    with pytest.raises(ValueError):
        CalibrationRecord(40, 41, 0)
    with pytest.raises(ValueError):
        CalibrationRecord(40, 30, 41)
    with pytest.raises(ValueError):
        CalibrationRecord(0, 0, 0)


def test_record_from_lists():
    truth = ["a", "b", "c", "d", "e"]
    recorded = ["a", "b", "c", "d", "zz"]
    assert CalibrationRecord.from_lists(truth, recorded) == CalibrationRecord(5, 4, 1)


GRID = [
    (S, e, r)
    for S in (20, 40, 80)
    for e in (0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5)
    for r in (0.05, 0.25, 0.5, 0.75, 0.95)
]


@pytest.mark.parametrize("S, e, r", GRID)
def test_round_trip_grid(S, e, r):
    rec = CalibrationRecord(S, expected_S_sub_e(S, e, r), expected_f_sub0(S, e, r))
    est = estimate_error_rates(rec)
    assert est.boundary_flag is BoundaryFlag.INTERIOR
    assert est.e_bar == pytest.approx(e, abs=1e-6)
    assert est.r == pytest.approx(r, abs=1e-6)
    assert est.residual < 1e-8


@settings(max_examples=300, deadline=None)
@given(st.sampled_from([20, 40, 80]), st.floats(0.01, 0.5), st.floats(0.05, 0.95))
def test_round_trip_property(S, e, r):
    rec = CalibrationRecord(S, expected_S_sub_e(S, e, r), expected_f_sub0(S, e, r))
    est = estimate_error_rates(rec)
    assert abs(est.e_bar - e) < 1e-6
    assert abs(est.r - r) < 1e-6
    assert est.residual < 1e-8


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 100).flatmap(
    lambda S: st.tuples(st.just(S), st.integers(0, S), st.integers(0, S))))
def test_never_raises_on_valid_records(rec):
    est = estimate_error_rates(CalibrationRecord(*rec))
    assert 0 <= est.e_bar <= 1 and 0 <= est.r <= 1
    assert est.residual >= 0
    if est.boundary_flag is not BoundaryFlag.NO_SOLUTION_CLAMPED:
        assert est.residual < 1e-8


@pytest.mark.parametrize("S", [1, 7, 40, 200])
def test_perfect_record_always_zero(S):
    assert estimate_error_rates(CalibrationRecord(S, S, 0)).e_bar == 0.0
