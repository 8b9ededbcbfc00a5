"""Species richness estimation corrected for observer misidentification error."""

from .adjustment import (
    AdjustedCounts,
    RawCounts,
    adjust_counts,
    adjust_doubletons,
    adjust_observed,
    adjust_singletons,
)
from .analysis import analyze
from .bootstrap import BootstrapConfig, bootstrap_se
from .calibration import (
    BoundaryFlag,
    CalibrationRecord,
    ErrorRateEstimate,
    estimate_error_rates,
    expected_f_sub0,
    expected_S_sub_e,
)
from .estimators import RichnessEstimate, adjusted_estimator, chao2, chao2_variance, jackknife1
from .io import AnalysisReport, parse_incidence_csv
from .simulator import (
    DetectionModel,
    ErrorModel,
    ExperimentConfig,
    SimulationSummary,
    run_experiment,
)
from .survey import FrequencyCounts, IncidenceMatrix, tally_frequencies

__version__ = "0.1.0"
