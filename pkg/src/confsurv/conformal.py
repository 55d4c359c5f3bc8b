"""Bootstrap conformal predictive intervals for right-censored data.

Calibration draws one bootstrap resample of the training data, refits the
working model on it, then scores pairs (T, X) drawn from the
inverse-censoring-weighted joint distribution of the original data with the
refitted survival function. Order statistics of those scores give the
score band [L, R]; the interval for a new covariate vector is obtained by
inverting the original-data fit at the band edges.

Extensions implemented here:

* eta-truncated intervals for min(T, eta), the reliable target when the
  working model cannot extrapolate beyond the largest observed failure time;
* remaining-lifetime intervals conditioning on survival past a time c_L
  (scores become conditional survival ratios);
* split validation, estimating empirical coverage on the uncensored rows of
  a held-out fold, with scores drawn uniformly from the uncensored training
  rows;
* the weighted calibration diagnostic psi(u), an inverse-weighted estimate
  of P(S(T | X) <= u) that should track the diagonal when the working model
  is correct.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from .censoring import CENSORING_KINDS, CensoringModel, fit_censoring_model
from .data import Dataset
from .errors import FitDiverged, InvalidInput, InvalidSplit
from .ipcw import WeightedPairSample, ipcw_joint_sample
from .models import (
    WORKING_MODELS,
    CoxModelFit,
    WorkingModelFit,
    fit_working_model,
)
from .rng import RandomStream

SIDEDNESS = ("two_sided", "lower_only")

# Minimum number of uncensored observations beyond c_L for the
# remaining-lifetime pathway.
MIN_CONDITIONAL_SUPPORT = 50


@dataclass(frozen=True)
class ConformalConfig:
    """Settings for bootstrap conformal calibration.

    ``alpha`` is the miscoverage level (alpha = 1 yields a degenerate point
    interval); ``n_bootstrap`` is the number of score replicates B.
    ``refit_per_replicate`` moves the bootstrap resample and refit inside the
    replicate loop (one refitted model per score) instead of the default
    single shared refit.
    """

    alpha: float = 0.10
    n_bootstrap: int = 2000
    sidedness: str = "two_sided"
    truncate_at_eta: bool = False
    refit_per_replicate: bool = False
    working_model: str = "cox"
    censoring_kind: str = "marginal"

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise InvalidInput("alpha must be in (0, 1]")
        if self.n_bootstrap < 100:
            raise InvalidInput("n_bootstrap must be at least 100")
        if self.sidedness not in SIDEDNESS:
            raise InvalidInput(f"sidedness must be one of {SIDEDNESS}")
        if self.sidedness == "two_sided" and self.n_bootstrap * self.alpha / 2.0 < 1.0:
            raise InvalidInput("two-sided calibration needs n_bootstrap * alpha / 2 >= 1")
        if self.working_model not in WORKING_MODELS:
            raise InvalidInput(f"working_model must be one of {WORKING_MODELS}")
        if self.censoring_kind not in CENSORING_KINDS:
            raise InvalidInput(f"censoring_kind must be one of {CENSORING_KINDS}")


def _order_index(value: float) -> int:
    # [x] of the quantile rules; the small shift guards against cases like
    # 2000 * 0.95 evaluating to 1899.9999999999998.
    return int(math.floor(value + 1e-8))


def score_band(sorted_scores: np.ndarray, alpha: float, sidedness: str = "two_sided") -> tuple[float, float]:
    """Score-quantile band from sorted scores.

    Two-sided: the [B alpha/2]-th and [B (1 - alpha/2)]-th order statistics.
    Lower-only: (0, [B (1 - alpha)]-th order statistic); only the upper edge
    is used since large scores correspond to small times.
    """
    n = sorted_scores.size
    if sidedness == "two_sided":
        k_low = min(max(_order_index(n * alpha / 2.0), 1), n)
        k_high = min(max(_order_index(n * (1.0 - alpha / 2.0)), 1), n)
        return float(sorted_scores[k_low - 1]), float(sorted_scores[k_high - 1])
    k_high = min(max(_order_index(n * (1.0 - alpha)), 1), n)
    return 0.0, float(sorted_scores[k_high - 1])


@dataclass(frozen=True)
class ConformalCalibration:
    """Frozen output of the calibration step.

    ``score_low`` and ``score_high`` are the two-sided band edges for the
    configured alpha; the raw ``scores`` are kept so intervals can be formed
    at other levels without recalibrating. ``theta_star`` is None when the
    refit-per-replicate mode was used (there is no single refitted model).
    """

    score_low: float
    score_high: float
    scores: np.ndarray
    theta_hat: WorkingModelFit
    theta_star: WorkingModelFit | None
    eta: float
    config: ConformalConfig
    conditioning_time: float = 0.0

    def __post_init__(self):
        s = np.array(np.asarray(self.scores, dtype=float), copy=True)
        s.setflags(write=False)
        object.__setattr__(self, "scores", s)

    @cached_property
    def sorted_scores(self) -> np.ndarray:
        s = np.sort(self.scores)
        s.setflags(write=False)
        return s


@dataclass(frozen=True)
class PredictionInterval:
    """Interval for a future failure time (or min(T, eta) when truncated).

    ``upper`` is ``math.inf`` for one-sided intervals; ``capped`` marks an
    upper endpoint pinned to the support limit eta of a step-function working
    model rather than a genuine survival inversion.
    """

    lower: float
    upper: float
    alpha: float
    kind: str
    conditioning_time: float = 0.0
    capped: bool = False


def bootstrap_resample(data: Dataset, rng: RandomStream) -> Dataset:
    """Size-n resample with replacement; raises FitDiverged when the resample
    has no events (the working model cannot be refitted on it)."""
    idx = rng.generator.integers(0, data.n, size=data.n)
    try:
        return data.subset(idx)
    except InvalidInput as exc:
        raise FitDiverged("bootstrap resample contains no observed failures") from exc


def _conditional_scores(
    fit: WorkingModelFit, times: np.ndarray, x: np.ndarray, conditioning_time: float
) -> np.ndarray:
    scores = fit.survival_many(times, x)
    if conditioning_time > 0.0:
        denom = fit.survival_many(np.full(times.shape, conditioning_time), x)
        scores = scores / denom
    return scores


def _calibrate(
    data: Dataset,
    cfg: ConformalConfig,
    rng: RandomStream,
    conditioning_time: float,
    pair_source: WeightedPairSample | None = None,
) -> ConformalCalibration:
    theta_hat = fit_working_model(data, cfg.working_model)
    if pair_source is None:
        cm = fit_censoring_model(data, cfg.censoring_kind)
        pair_source = ipcw_joint_sample(data, cm)
    if conditioning_time > 0.0:
        pair_source = pair_source.restrict_above(conditioning_time, MIN_CONDITIONAL_SUPPORT)

    if cfg.refit_per_replicate:
        theta_star = None
        scores = np.empty(cfg.n_bootstrap)
        for b in range(cfg.n_bootstrap):
            refit = fit_working_model(bootstrap_resample(data, rng), cfg.working_model)
            idx = int(pair_source.draw_indices(rng))
            scores[b] = _conditional_scores(
                refit,
                pair_source.times[idx : idx + 1],
                pair_source.covariates[idx : idx + 1],
                conditioning_time,
            )[0]
    else:
        theta_star = fit_working_model(bootstrap_resample(data, rng), cfg.working_model)
        idx = pair_source.draw_indices(rng, cfg.n_bootstrap)
        scores = _conditional_scores(
            theta_star, pair_source.times[idx], pair_source.covariates[idx], conditioning_time
        )

    low, high = score_band(np.sort(scores), cfg.alpha, "two_sided")
    return ConformalCalibration(
        score_low=low,
        score_high=high,
        scores=scores,
        theta_hat=theta_hat,
        theta_star=theta_star,
        eta=data.eta,
        config=cfg,
        conditioning_time=float(conditioning_time),
    )


def calibrate(data: Dataset, cfg: ConformalConfig, rng: RandomStream) -> ConformalCalibration:
    """Bootstrap conformal calibration on a training dataset.

    One bootstrap resample and refit (or one per replicate when
    ``cfg.refit_per_replicate``), then ``cfg.n_bootstrap`` scored draws from
    the weighted joint sample of the original data.
    """
    return _calibrate(data, cfg, rng, 0.0)


def calibrate_remaining(
    data: Dataset, conditioning_time: float, cfg: ConformalConfig, rng: RandomStream
) -> ConformalCalibration:
    """Calibration conditional on survival past ``conditioning_time``.

    Pairs are drawn from the weighted joint sample restricted to times above
    the threshold and scored with conditional survival ratios. With
    ``conditioning_time = 0`` this is bit-identical to :func:`calibrate`.
    """
    if conditioning_time < 0:
        raise InvalidInput("conditioning time must be nonnegative")
    return _calibrate(data, cfg, rng, float(conditioning_time))


def interval_bounds(
    cal: ConformalCalibration, x: np.ndarray, cfg: ConformalConfig | None = None
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized interval endpoints for rows of ``x``.

    Returns ``(lower, upper, capped)``; ``upper`` is ``inf`` for one-sided
    intervals. The requested ``cfg`` may differ from the calibration's (for
    example a different alpha); the band is re-read from the stored scores.
    """
    cfg = cfg if cfg is not None else cal.config
    x = np.atleast_2d(np.asarray(x, dtype=float))
    n = x.shape[0]
    low, high = score_band(cal.sorted_scores, cfg.alpha, cfg.sidedness)
    theta = cal.theta_hat
    c_l = cal.conditioning_time
    if c_l > 0.0:
        base = theta.survival_many(np.full(n, c_l), x)
    else:
        base = np.ones(n)

    lower, lower_capped = _invert_survival_levels(theta, base * high, x)
    if cfg.sidedness == "lower_only":
        upper = np.full(n, math.inf)
        upper_capped = np.zeros(n, dtype=bool)
    else:
        upper, upper_capped = _invert_survival_levels(theta, base * low, x)
    if cfg.truncate_at_eta:
        overshoot = upper > cal.eta
        upper = np.minimum(upper, cal.eta)
        upper_capped = upper_capped | overshoot
    if c_l > 0.0:
        lower = np.maximum(lower, c_l)
    lower = np.minimum(lower, upper)
    return lower, upper, lower_capped | upper_capped


def _invert_survival_levels(
    theta: WorkingModelFit, levels: np.ndarray, x: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    # Scores can underflow to exactly 0; S(t) <= 0 never holds, so the
    # inversion is beyond any support: eta (capped) for Cox, +inf otherwise.
    levels = np.asarray(levels, dtype=float)
    zero = levels <= 0.0
    safe = np.where(zero, 0.5, levels)
    times, capped = theta.inverse_survival_many(safe, x)
    if zero.any():
        if isinstance(theta, CoxModelFit):
            times = np.where(zero, theta.eta, times)
            capped = capped | zero
        else:
            times = np.where(zero, math.inf, times)
    return times, capped


def predict_intervals(
    cal: ConformalCalibration, x: np.ndarray, cfg: ConformalConfig | None = None
) -> list[PredictionInterval]:
    """Prediction intervals for each covariate row of ``x``."""
    cfg = cfg if cfg is not None else cal.config
    lower, upper, capped = interval_bounds(cal, x, cfg)
    return [
        PredictionInterval(
            lower=float(lo),
            upper=float(up),
            alpha=cfg.alpha,
            kind=cfg.sidedness,
            conditioning_time=cal.conditioning_time,
            capped=bool(cp),
        )
        for lo, up, cp in zip(lower, upper, capped)
    ]


def predict_interval(
    cal: ConformalCalibration, x_new, cfg: ConformalConfig | None = None
) -> PredictionInterval:
    """Prediction interval for one covariate vector."""
    return predict_intervals(cal, np.atleast_2d(np.asarray(x_new, dtype=float)), cfg)[0]


def remaining_lifetime_interval(
    data: Dataset,
    conditioning_time: float,
    x_new,
    cfg: ConformalConfig,
    rng: RandomStream,
) -> PredictionInterval:
    """Interval for a failure time known to exceed ``conditioning_time``.

    The returned interval bounds the full failure time T (not T - c_L); its
    lower endpoint never drops below the conditioning time when the band's
    upper edge is at most 1. With ``conditioning_time = 0`` and a shared
    stream this reproduces :func:`calibrate` + :func:`predict_interval`
    bit for bit.
    """
    cal = calibrate_remaining(data, conditioning_time, cfg, rng)
    return predict_interval(cal, x_new, cfg)


@dataclass(frozen=True)
class SplitValidationResult:
    """Per-split empirical coverage of uncensored held-out rows."""

    coverages: np.ndarray
    n_test_uncensored: np.ndarray
    split_fraction: float

    def __post_init__(self):
        c = np.array(np.asarray(self.coverages, dtype=float), copy=True)
        c.setflags(write=False)
        object.__setattr__(self, "coverages", c)
        m = np.array(np.asarray(self.n_test_uncensored, dtype=int), copy=True)
        m.setflags(write=False)
        object.__setattr__(self, "n_test_uncensored", m)

    @property
    def n_splits(self) -> int:
        return int(self.coverages.size)

    @property
    def mean_coverage(self) -> float:
        return float(self.coverages.mean())

    @property
    def sd_coverage(self) -> float:
        return float(self.coverages.std(ddof=1)) if self.n_splits > 1 else 0.0


def split_validate(
    data: Dataset,
    cfg: ConformalConfig,
    n_splits: int,
    split_fraction: float,
    rng: RandomStream,
) -> SplitValidationResult:
    """Repeated train/test split validation of empirical coverage.

    Each split calibrates on the training fold with pairs drawn uniformly
    from its uncensored rows (equal probability, no censoring weights) and
    measures the fraction of uncensored testing-fold rows whose survival
    score under the training-fold fit lands inside the band.

    Raises
    ------
    InvalidSplit
        A training fold without events, or a testing fold without any
        uncensored row to validate on.
    """
    if not 0.0 < split_fraction < 1.0:
        raise InvalidInput("split_fraction must be in (0, 1)")
    if n_splits < 1:
        raise InvalidInput("n_splits must be positive")
    coverages = np.empty(n_splits)
    m_test = np.empty(n_splits, dtype=int)
    for s in range(n_splits):
        split_rng = rng.substream(s)
        perm = split_rng.generator.permutation(data.n)
        n_train = min(max(int(round(split_fraction * data.n)), 1), data.n - 1)
        train_idx, test_idx = perm[:n_train], perm[n_train:]
        if not data.events[train_idx].any():
            raise InvalidSplit("training fold contains no observed failures")
        if not data.events[test_idx].any():
            raise InvalidSplit("testing fold contains no uncensored rows to validate on")
        train = data.subset(train_idx)
        uncensored = train.events
        uniform_source = WeightedPairSample(
            train.times[uncensored],
            train.covariates[uncensored],
            np.ones(int(uncensored.sum())),
            train.n,
        )
        cal = _calibrate(train, cfg, split_rng, 0.0, pair_source=uniform_source)
        test_mask = data.events[test_idx]
        test_times = data.times[test_idx][test_mask]
        test_x = data.covariates[test_idx][test_mask]
        test_scores = cal.theta_hat.survival_many(test_times, test_x)
        low, high = score_band(cal.sorted_scores, cfg.alpha, "two_sided")
        covered = (test_scores >= low) & (test_scores <= high)
        coverages[s] = float(covered.mean())
        m_test[s] = int(test_mask.sum())
    return SplitValidationResult(coverages, m_test, split_fraction)


def shift_diagnostic(
    data: Dataset, fit: WorkingModelFit, cm: CensoringModel, grid
) -> np.ndarray:
    """Weighted calibration curve psi(u) over a grid of levels.

    psi(u) is the censoring-weighted fraction of uncensored rows whose
    survival score S(T_i | X_i) falls at or below u. Under a correct working
    model (and correct weights) it estimates P(S(T | X) <= u) = u, so
    departures from the diagonal diagnose working-model misfit.
    """
    grid_arr = np.asarray(grid, dtype=float)
    if np.any(grid_arr < 0) or np.any(grid_arr > 1):
        raise InvalidInput("diagnostic levels must lie in [0, 1]")
    sample = ipcw_joint_sample(data, cm)
    scores = fit.survival_many(sample.times, sample.covariates)
    weights = sample.weights
    indicator = scores[:, None] <= grid_arr[None, :]
    return (weights[:, None] * indicator).sum(axis=0) / weights.sum()


def config_with_alpha(cfg: ConformalConfig, alpha: float | None) -> ConformalConfig:
    """Config with a replaced alpha (validation rerun); None keeps the original."""
    if alpha is None or alpha == cfg.alpha:
        return cfg
    return replace(cfg, alpha=float(alpha))
