"""Richness point estimators for incidence data.

All estimators take real-valued counts, so they apply equally to raw
frequency counts and to error-adjusted ones.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .adjustment import AdjustedCounts


class Method(str, enum.Enum):
    CHAO2 = "chao2"
    JACKKNIFE1 = "jackknife1"
    ADJUSTED = "adjusted"


class Branch(str, enum.Enum):
    TAYLOR_CORRECTED = "taylor_corrected"
    JACKKNIFE_FALLBACK = "jackknife_fallback"
    NONE = "none"


@dataclass(frozen=True)
class RichnessEstimate:
    point: float
    method: Method
    branch: Branch = Branch.NONE
    se: float | None = None

    def with_se(self, se: float) -> "RichnessEstimate":
        return replace(self, se=se)


def _check(T, *counts):
    if T < 2:
        raise ValueError("T must be at least 2")
    if any(c < 0 for c in counts):
        raise ValueError("counts must be nonnegative")


def chao2(S_obs: float, Q1: float, Q2: float, T: int) -> RichnessEstimate:
    """Chao2 lower bound ``S_obs + (T-1)/T * Q1^2 / (2 Q2)``.

    Without doubletons the bias-corrected term ``Q1 (Q1 - 1) / 2`` is used.
    """
    _check(T, S_obs, Q1, Q2)
    A = (T - 1) / T
    if Q2 > 0:
        f0 = Q1 * Q1 / (2.0 * Q2)
    else:
        f0 = max(Q1 * (Q1 - 1.0) / 2.0, 0.0)
    return RichnessEstimate(S_obs + A * f0, Method.CHAO2)


def chao2_variance(S_obs: float, Q1: float, Q2: float, T: int) -> float:
    """Classical large-sample variance of the incidence Chao2 estimator."""
    _check(T, S_obs, Q1, Q2)
    A = (T - 1) / T
    if Q2 > 0:
        x = Q1 / Q2
        return Q2 * (A / 2 * x**2 + A**2 * x**3 + A**2 / 4 * x**4)
    if Q1 == 0:
        return 0.0
    s_hat = chao2(S_obs, Q1, Q2, T).point
    v = A * Q1 * (Q1 - 1) / 2 + A**2 * Q1 * (2 * Q1 - 1) ** 2 / 4 - A**2 * Q1**4 / (4 * s_hat)
    return max(v, 0.0)


def jackknife1(S_obs: float, Q1: float, T: int) -> RichnessEstimate:
    """First-order jackknife ``S_obs + (T-1)/T * Q1``."""
    _check(T, S_obs, Q1)
    return RichnessEstimate(S_obs + (T - 1) / T * Q1, Method.JACKKNIFE1)


def taylor_correction(Q1: float, Q2: float) -> float:
    """Undetected-richness term of the adjusted estimator, before clamping.

    ``Q1^2/(2 Q2)`` less the second-order expansion bias of that ratio.
    """
    return Q1 * Q1 / (2.0 * Q2) - Q1 / (2.0 * Q2) - Q1 * Q1 / (2.0 * Q2 * Q2)


def adjusted_estimator(adj: AdjustedCounts) -> RichnessEstimate:
    """Bias-adjusted richness on error-corrected counts.

    With more than one adjusted doubleton the Taylor-corrected Chao2 term is
    used (clamped at 0); otherwise the estimator falls back to the
    first-order jackknife form.
    """
    S, Q1, Q2, T = adj.S_obs_a, adj.Q1_a, adj.Q2_a, adj.T
    _check(T, S, Q1, Q2)
    A = (T - 1) / T
    if Q2 <= 1.0:
        return RichnessEstimate(S + A * Q1, Method.ADJUSTED, Branch.JACKKNIFE_FALLBACK)
    return RichnessEstimate(
        S + A * max(taylor_correction(Q1, Q2), 0.0), Method.ADJUSTED, Branch.TAYLOR_CORRECTED
    )


def adjusted_point_vec(S, Q1, Q2, T: int) -> np.ndarray:
    """Vectorized :func:`adjusted_estimator` point values over count arrays."""
    S = np.asarray(S, dtype=float)
    Q1 = np.asarray(Q1, dtype=float)
    Q2 = np.asarray(Q2, dtype=float)
    A = (T - 1) / T
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        corr = np.maximum(Q1 * Q1 / (2 * Q2) - Q1 / (2 * Q2) - Q1 * Q1 / (2 * Q2 * Q2), 0.0)
    return np.where(Q2 <= 1.0, S + A * Q1, S + A * corr)


def chao2_point_vec(S, Q1, Q2, T: int) -> np.ndarray:
    """Vectorized :func:`chao2` point values over count arrays."""
    S = np.asarray(S, dtype=float)
    Q1 = np.asarray(Q1, dtype=float)
    Q2 = np.asarray(Q2, dtype=float)
    A = (T - 1) / T
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        ratio = Q1 * Q1 / (2 * Q2)
    return np.where(Q2 > 0, S + A * ratio, S + A * np.maximum(Q1 * (Q1 - 1) / 2, 0.0))


# Moment plug-ins behind the Taylor expansion; used to derive test oracles.

def var_count(Q: float, s_hat: float) -> float:
    """Plug-in variance ``Q (1 - Q / s_hat)`` of a frequency count."""
    return Q * (1.0 - Q / s_hat)


def cov_q1_q2(Q1: float, Q2: float, s_hat: float) -> float:
    """Plug-in covariance ``-Q1 Q2 / s_hat`` of singleton and doubleton counts."""
    return -Q1 * Q2 / s_hat


def ratio_expansion(Q1: float, Q2: float, s_hat: float) -> float:
    """Second-order expansion of ``E[Q1^2 / (2 Q2)]`` about the observed counts."""
    return (
        Q1**2 / (2 * Q2)
        + var_count(Q1, s_hat) / (2 * Q2)
        - Q1 * cov_q1_q2(Q1, Q2, s_hat) / Q2**2
        + Q1**2 * var_count(Q2, s_hat) / (2 * Q2**3)
    )


def chao2_se(S_obs: float, Q1: float, Q2: float, T: int) -> float:
    return math.sqrt(chao2_variance(S_obs, Q1, Q2, T))
