"""Bootstrap conformal predictive intervals for right-censored survival data."""

from .censoring import (
    CensoringModel,
    MarginalCensoringModel,
    RegressionCensoringModel,
    StratifiedCensoringModel,
    fit_censoring_model,
)
from .conformal import (
    ConformalCalibration,
    ConformalConfig,
    PredictionInterval,
    SplitValidationResult,
    calibrate,
    calibrate_remaining,
    predict_interval,
    predict_intervals,
    remaining_lifetime_interval,
    shift_diagnostic,
    split_validate,
)
from .curves import CumulativeHazardCurve, StepSurvivalCurve
from .data import Dataset, Observation
from .errors import (
    CalibrationFailed,
    ConfsurvError,
    FitDiverged,
    IngestError,
    InsufficientSupport,
    InvalidInput,
    InvalidSplit,
    SingularDesign,
    WeightDegenerate,
)
from .ipcw import WeightedPairSample, ipcw_joint_sample, sample_pair
from .kaplan_meier import km_estimate
from .models import (
    Capped,
    CoxModelFit,
    LogNormalModelFit,
    WeibullModelFit,
    WorkingModelFit,
    fit_cox,
    fit_lognormal,
    fit_weibull,
    fit_working_model,
)
from .rng import RandomStream
from .simulation import (
    CoverageReport,
    GenerativeConfig,
    MethodCoverage,
    calibrate_tau_c,
    conditional_interval,
    generate,
    km_marginal_interval,
    run_study,
)

__version__ = "0.1.0"
