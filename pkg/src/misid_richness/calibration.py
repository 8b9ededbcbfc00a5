"""Known-subplot calibration of the observer's identification error.

The designer knows the ``S_sub`` species of a test subplot. After the
observer inventories it, two numbers are compared against the truth: how
many true subplot species were recorded (``S_sub_e``) and how many recorded
names do not exist in the subplot (``f_sub_0``). Two forward expectations
link these to the mean error rate ``e_bar`` and the in-plot confusion
probability ``r``; :func:`estimate_error_rates` inverts them.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

GRID_POINTS = 1024
ROOT_TOL = 1e-12


class BoundaryFlag(str, enum.Enum):
    INTERIOR = "interior"
    ZERO_ERROR = "zero_error"
    R_PINNED_AT_ONE = "r_pinned_at_one"
    NO_SOLUTION_CLAMPED = "no_solution_clamped"


@dataclass(frozen=True)
class CalibrationRecord:
    """Outcome of the subplot test.

    Field surveys give integers; real values are accepted so that expected
    counts can be fed back through the solver.
    """

    S_sub: int
    S_sub_e: int
    f_sub_0: int

    def __post_init__(self):
        if self.S_sub < 1:
            raise ValueError("S_sub must be positive")
        if not 0 <= self.S_sub_e <= self.S_sub:
            raise ValueError(f"S_sub_e must lie in [0, S_sub={self.S_sub}], got {self.S_sub_e}")
        if not 0 <= self.f_sub_0 <= self.S_sub:
            raise ValueError(f"f_sub_0 must lie in [0, S_sub={self.S_sub}], got {self.f_sub_0}")

    @classmethod
    def from_lists(cls, truth, recorded) -> "CalibrationRecord":
        """Derive the record by comparing the designer's list with the observer's."""
        truth = set(truth)
        recorded = set(recorded)
        return cls(len(truth), len(recorded & truth), len(recorded - truth))


@dataclass(frozen=True)
class ErrorRateEstimate:
    e_bar: float
    r: float
    residual: float
    boundary_flag: BoundaryFlag

    @property
    def product(self) -> float:
        """``e_bar * r``, the only combination the count adjustments use."""
        return self.e_bar * self.r


def _check_rates(e_bar, r):
    if not 0.0 <= e_bar <= 1.0:
        raise ValueError(f"e_bar must be in [0, 1], got {e_bar}")
    if not 0.0 <= r <= 1.0:
        raise ValueError(f"r must be in [0, 1], got {r}")


def expected_f_sub0(S_sub: float, e_bar: float, r: float) -> float:
    """Expected number of recorded names that are not subplot species."""
    if S_sub <= 0:
        raise ValueError("S_sub must be positive")
    _check_rates(e_bar, r)
    return S_sub * e_bar * (1.0 - r)


def _miss_rate(S_sub, e_bar, r):
    # fraction of subplot species never recorded: misidentified, and no other
    # species misidentified into them
    return e_bar * (1.0 - e_bar * r / (S_sub - r)) ** (S_sub - 1)


def expected_S_sub_e(S_sub: float, e_bar: float, r: float) -> float:
    """Expected number of true subplot species that appear in the inventory."""
    _check_rates(e_bar, r)
    if S_sub - r <= 0:
        raise ValueError(f"S_sub - r must be positive (S_sub={S_sub}, r={r})")
    return S_sub - S_sub * _miss_rate(S_sub, e_bar, r)


def _residual(S_sub, e_bar, r, rec: CalibrationRecord) -> float:
    return max(
        abs(expected_f_sub0(S_sub, e_bar, r) - rec.f_sub_0),
        abs(expected_S_sub_e(S_sub, e_bar, r) - rec.S_sub_e),
    )


def _bisect(g, lo, hi, g_lo, tol=ROOT_TOL, maxiter=200):
    """Bisection on a bracket with ``g(lo)`` and ``g(hi)`` of opposite sign."""
    mid = lo
    for _ in range(maxiter):
        mid = 0.5 * (lo + hi)
        g_mid = g(mid)
        if abs(g_mid) < tol or mid in (lo, hi):
            return mid
        if (g_mid < 0) == (g_lo < 0):
            lo, g_lo = mid, g_mid
        else:
            hi = mid
    return mid


def _first_sign_change(xs, gs):
    signs = np.sign(gs)
    zero = np.flatnonzero(signs == 0)
    if zero.size:
        return int(zero[0]), True
    flips = np.flatnonzero(signs[:-1] * signs[1:] < 0)
    if flips.size:
        return int(flips[0]), False
    return None, False


def estimate_error_rates(rec: CalibrationRecord) -> ErrorRateEstimate:
    """Solve the two subplot expectations for ``(e_bar, r)``.

    Substituting ``e_bar (1 - r) = f_sub_0 / S_sub`` leaves a single equation
    in ``r`` on ``[0, 1 - f_sub_0/S_sub]``, which keeps ``e_bar <= 1``. The
    first sign change on a uniform grid is refined by bisection. Records the
    model cannot reproduce get the grid minimizer of ``|g|`` and the
    ``no_solution_clamped`` flag; this never raises.

    Degenerate records: a perfect inventory returns ``(0, 0)`` (``r`` is not
    identifiable there; 0 is a convention), and ``f_sub_0 = 0`` with missed
    species pins ``r`` at 1 and solves for ``e_bar`` alone.
    """
    S = float(rec.S_sub)
    a = rec.f_sub_0 / S
    b = (rec.S_sub - rec.S_sub_e) / S

    if rec.f_sub_0 == 0:
        if rec.S_sub_e == rec.S_sub:
            return ErrorRateEstimate(0.0, 0.0, 0.0, BoundaryFlag.ZERO_ERROR)
        if rec.S_sub == 1:
            # r = 1 makes S_sub - r vanish for a single species
            return _clamped_on_e(rec, r=0.0)
        return _solve_e_at_r1(rec, b)

    if a >= 1.0:
        # every species became an out-of-subplot record
        e_bar, r = 1.0, 0.0
        res = _residual(S, e_bar, r, rec)
        flag = BoundaryFlag.INTERIOR if res < 1e-8 else BoundaryFlag.NO_SOLUTION_CLAMPED
        return ErrorRateEstimate(e_bar, r, res, flag)

    r_max = 1.0 - a

    def g(r):
        e = min(a / (1.0 - r), 1.0)
        return _miss_rate(S, e, r) - b

    xs = np.linspace(0.0, r_max, GRID_POINTS)
    es = np.minimum(a / (1.0 - xs), 1.0)
    gs = es * (1.0 - es * xs / (S - xs)) ** (S - 1) - b
    idx, exact = _first_sign_change(xs, gs)
    if idx is None:
        j = int(np.argmin(np.abs(gs)))
        r = float(xs[j])
        e_bar = min(a / (1.0 - r), 1.0)
        return ErrorRateEstimate(
            e_bar, r, _residual(S, e_bar, r, rec), BoundaryFlag.NO_SOLUTION_CLAMPED
        )
    if exact:
        r = float(xs[idx])
    else:
        r = _bisect(g, float(xs[idx]), float(xs[idx + 1]), float(gs[idx]))
    e_bar = min(a / (1.0 - r), 1.0)
    return ErrorRateEstimate(e_bar, r, _residual(S, e_bar, r, rec), BoundaryFlag.INTERIOR)


def _solve_e_at_r1(rec: CalibrationRecord, b: float) -> ErrorRateEstimate:
    S = float(rec.S_sub)

    def h(e):
        return _miss_rate(S, e, 1.0) - b

    xs = np.linspace(0.0, 1.0, GRID_POINTS)
    hs = xs * (1.0 - xs / (S - 1.0)) ** (S - 1) - b
    idx, exact = _first_sign_change(xs, hs)
    if idx is None:
        j = int(np.argmin(np.abs(hs)))
        e = float(xs[j])
        return ErrorRateEstimate(e, 1.0, _residual(S, e, 1.0, rec), BoundaryFlag.NO_SOLUTION_CLAMPED)
    e = float(xs[idx]) if exact else _bisect(h, float(xs[idx]), float(xs[idx + 1]), float(hs[idx]))
    return ErrorRateEstimate(e, 1.0, _residual(S, e, 1.0, rec), BoundaryFlag.R_PINNED_AT_ONE)


def _clamped_on_e(rec: CalibrationRecord, r: float) -> ErrorRateEstimate:
    S = float(rec.S_sub)
    xs = np.linspace(0.0, 1.0, GRID_POINTS)
    res = [_residual(S, e, r, rec) for e in xs]
    e = float(xs[int(np.argmin(res))])
    return ErrorRateEstimate(e, r, _residual(S, e, r, rec), BoundaryFlag.NO_SOLUTION_CLAMPED)
