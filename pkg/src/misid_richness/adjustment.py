"""Correct error-contaminated observed, singleton and doubleton counts.

Every correction depends on the error rates only through the product
``p = e_bar * r``: a species is lost from its own label with probability
``p``, and a rare species keeps its frequency class only if no other species
is folded into it, which happens with probability about ``exp(-p)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .calibration import ErrorRateEstimate

DIVERGENCE_MARGIN = 1e-9


@dataclass(frozen=True)
class RawCounts:
    S_obs_e: float
    Q1_e: float
    Q2_e: float
    T: int

    def __post_init__(self):
        if min(self.S_obs_e, self.Q1_e, self.Q2_e) < 0:
            raise ValueError("counts must be nonnegative")
        if self.Q1_e + self.Q2_e > self.S_obs_e:
            raise ValueError("Q1_e + Q2_e cannot exceed S_obs_e")
        if self.T < 2:
            raise ValueError("T must be at least 2")


@dataclass(frozen=True)
class AdjustedCounts:
    S_obs_a: float
    Q1_a: float
    Q2_a: float
    T: int

    def __post_init__(self):
        if min(self.S_obs_a, self.Q1_a, self.Q2_a) < 0:
            raise ValueError("adjusted counts must be nonnegative")
        if self.T < 2:
            raise ValueError("T must be at least 2")


def _product(e_bar: float, r: float) -> float:
    if not 0.0 <= e_bar <= 1.0 or not 0.0 <= r <= 1.0:
        raise ValueError(f"error rates must lie in [0, 1], got e_bar={e_bar}, r={r}")
    p = e_bar * r
    if p >= 1.0 - DIVERGENCE_MARGIN:
        raise ValueError(f"e_bar*r={p} too close to 1; the adjustment diverges")
    return p


def _survival(p: float) -> float:
    # keeps its label and receives no foreign records
    return (1.0 - p) * math.exp(-p)


def adjust_observed(S_obs_e: float, e_bar: float, r: float) -> float:
    """Observed richness corrected for species lost to in-plot confusion."""
    if S_obs_e < 0:
        raise ValueError("S_obs_e must be nonnegative")
    p = _product(e_bar, r)
    if p == 0.0:
        return S_obs_e
    return S_obs_e / (1.0 - p)


def adjust_singletons(Q1_e: float, e_bar: float, r: float) -> float:
    """Singleton count corrected for singletons lost or merged."""
    if Q1_e < 0:
        raise ValueError("Q1_e must be nonnegative")
    p = _product(e_bar, r)
    if p == 0.0:
        return Q1_e
    return Q1_e / _survival(p)


def adjust_doubletons(raw: RawCounts, Q1_a: float, S_obs_a: float, e_bar: float, r: float) -> float:
    """Doubleton count corrected for losses and for spurious doubletons.

    Two true singletons recorded under one label in different units look
    like a doubleton; their expected number is removed before rescaling.
    The result is clamped at zero.
    """
    if S_obs_a <= 0:
        raise ValueError("S_obs_a must be positive")
    p = _product(e_bar, r)
    if p == 0.0:
        return raw.Q2_e
    surv = _survival(p)
    spurious = Q1_a * p * (1.0 - 1.0 / raw.T) * (Q1_a / S_obs_a) * math.exp(-p)
    return max(0.0, (raw.Q2_e - spurious) / surv)


def adjust_counts(raw: RawCounts, est: ErrorRateEstimate) -> AdjustedCounts:
    """Apply the observed, singleton and doubleton corrections in order."""
    e_bar, r = est.e_bar, est.r
    S_obs_a = adjust_observed(raw.S_obs_e, e_bar, r)
    Q1_a = adjust_singletons(raw.Q1_e, e_bar, r)
    if S_obs_a == 0:
        Q2_a = raw.Q2_e
    else:
        Q2_a = adjust_doubletons(raw, Q1_a, S_obs_a, e_bar, r)
    return AdjustedCounts(S_obs_a, Q1_a, Q2_a, raw.T)
