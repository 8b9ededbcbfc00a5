"""End-to-end analysis of one survey: observed and error-adjusted richness."""

from __future__ import annotations

from .adjustment import RawCounts, adjust_counts
from .bootstrap import BootstrapConfig, bootstrap_se
from .calibration import CalibrationRecord, ErrorRateEstimate, estimate_error_rates
from .estimators import adjusted_estimator, chao2, chao2_se
from .io import AnalysisReport, ReportRow
from .survey import FrequencyCounts, IncidenceMatrix, tally_frequencies


def analyze(
    data: IncidenceMatrix | FrequencyCounts,
    calibration: CalibrationRecord | None = None,
    rates: tuple[float, float] | None = None,
    trials: int = 200,
    seed: int = 0,
) -> AnalysisReport:
    """Estimate richness from a survey, optionally correcting for misidentification.

    Error rates come either from a subplot ``calibration`` record or directly
    as ``rates = (e_bar, r)``. The observed row uses classical Chao2 and its
    analytic standard error; the adjusted row uses the binomial bootstrap.
    """
    if calibration is not None and rates is not None:
        raise ValueError("give either a calibration record or explicit rates, not both")
    fc = data if isinstance(data, FrequencyCounts) else tally_frequencies(data)
    T = fc.T
    report = AnalysisReport(T=T, calibration=calibration)
    obs = chao2(fc.S_obs, fc.Q1, fc.Q2, T)
    report.rows.append(ReportRow(
        "observed", float(fc.S_obs), float(fc.Q1), float(fc.Q2),
        obs.point, chao2_se(fc.S_obs, fc.Q1, fc.Q2, T),
    ))

    est: ErrorRateEstimate | None = None
    if calibration is not None:
        est = estimate_error_rates(calibration)
        report.residual = est.residual
        report.boundary_flag = est.boundary_flag.value
    elif rates is not None:
        est = ErrorRateEstimate(float(rates[0]), float(rates[1]), float("nan"), None)
    if est is None:
        return report

    report.e_bar, report.r = est.e_bar, est.r
    adj = adjust_counts(RawCounts(fc.S_obs, fc.Q1, fc.Q2, T), est)
    s_adj = adjusted_estimator(adj).point
    se = bootstrap_se(adj, s_adj, BootstrapConfig(trials, seed)) if s_adj > 0 else 0.0
    report.rows.append(ReportRow("adjusted", adj.S_obs_a, adj.Q1_a, adj.Q2_a, s_adj, se))
    return report
