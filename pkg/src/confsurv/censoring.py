"""Censoring-distribution models G(t | x, site) driving the IPCW weights.

Three variants:

* marginal: one Kaplan-Meier curve of the censoring time;
* stratified: one Kaplan-Meier curve per site label;
* regression: proportional hazards model for the censoring time (event
  indicator complemented), maximum partial likelihood plus Breslow baseline.

Evaluations always return values in [0, 1]. Left-limit evaluation G(t-) is
what the weighting uses: just before an observed failure the subject must
still be uncensored.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .curves import StepSurvivalCurve
from .data import Dataset
from .errors import InvalidInput
from .kaplan_meier import km_curve_from_arrays, km_estimate
from .models import fit_cox_arrays

CENSORING_KINDS = ("marginal", "stratified", "regression")

_UNIT_CURVE = StepSurvivalCurve(np.empty(0), np.empty(0))


@dataclass(frozen=True)
class MarginalCensoringModel:
    """G(t) ignoring covariates and sites."""

    curve: StepSurvivalCurve

    kind = "marginal"

    def survival(self, times, x=None, sites=None) -> np.ndarray:
        return np.asarray(self.curve.value(np.asarray(times, dtype=float)), dtype=float)

    def survival_left(self, times, x=None, sites=None) -> np.ndarray:
        return np.asarray(self.curve.value_left(np.asarray(times, dtype=float)), dtype=float)


@dataclass(frozen=True)
class StratifiedCensoringModel:
    """Site-specific censoring curves G_k(t)."""

    curves: Mapping[int, StepSurvivalCurve]
    site_sizes: Mapping[int, int]

    kind = "stratified"

    def _curve(self, site: int) -> StepSurvivalCurve:
        try:
            return self.curves[int(site)]
        except KeyError as exc:
            raise InvalidInput(f"site {site} was not present when the model was fitted") from exc

    def survival(self, times, x=None, sites=None) -> np.ndarray:
        return self._evaluate(times, sites, left=False)

    def survival_left(self, times, x=None, sites=None) -> np.ndarray:
        return self._evaluate(times, sites, left=True)

    def _evaluate(self, times, sites, left: bool) -> np.ndarray:
        t = np.atleast_1d(np.asarray(times, dtype=float))
        if sites is None:
            raise InvalidInput("stratified censoring model requires site labels")
        s = np.atleast_1d(np.asarray(sites))
        out = np.empty(t.shape)
        for site in np.unique(s):
            curve = self._curve(site)
            mask = s == site
            out[mask] = curve.value_left(t[mask]) if left else curve.value(t[mask])
        return out


@dataclass(frozen=True)
class RegressionCensoringModel:
    """Proportional hazards censoring model G(t | x) = G0(t)^exp(x gamma)."""

    gamma: np.ndarray
    baseline: StepSurvivalCurve  # G0, the baseline censoring survival curve

    kind = "regression"

    def __post_init__(self):
        g = np.array(np.asarray(self.gamma, dtype=float), copy=True)
        g.setflags(write=False)
        object.__setattr__(self, "gamma", g)

    def _relative_risk(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.exp(x @ self.gamma) if self.gamma.size else np.ones(x.shape[0])

    def survival(self, times, x=None, sites=None) -> np.ndarray:
        base = np.asarray(self.baseline.value(np.asarray(times, dtype=float)), dtype=float)
        return base ** self._relative_risk(x)

    def survival_left(self, times, x=None, sites=None) -> np.ndarray:
        base = np.asarray(self.baseline.value_left(np.asarray(times, dtype=float)), dtype=float)
        return base ** self._relative_risk(x)


CensoringModel = MarginalCensoringModel | StratifiedCensoringModel | RegressionCensoringModel


def fit_censoring_model(data: Dataset, kind: str = "marginal") -> CensoringModel:
    """Fit the censoring distribution of a dataset.

    Parameters
    ----------
    data : Dataset
    kind : {"marginal", "stratified", "regression"}

    Notes
    -----
    A stratum (or a dataset) without any censoring events gets the constant
    curve G = 1; this is not an error. The regression variant complements the
    event indicator and reuses the Cox machinery, so tied failures leave the
    risk set before the censorings at the same time.
    """
    if kind == "marginal":
        return MarginalCensoringModel(km_estimate(data, "censoring"))
    if kind == "stratified":
        if data.sites is None:
            raise InvalidInput("stratified censoring model requires site labels on every row")
        curves: dict[int, StepSurvivalCurve] = {}
        sizes: dict[int, int] = {}
        for site in np.unique(data.sites):
            mask = data.sites == site
            curves[int(site)] = km_curve_from_arrays(data.times[mask], data.events[mask], "censoring")
            sizes[int(site)] = int(mask.sum())
        return StratifiedCensoringModel(curves, sizes)
    if kind == "regression":
        censoring_events = ~data.events
        if not censoring_events.any():
            return RegressionCensoringModel(np.zeros(data.p), _UNIT_CURVE)
        gamma, cumhaz, _ = fit_cox_arrays(
            data.times, censoring_events, data.covariates, drop_tied_nonevents=True
        )
        return RegressionCensoringModel(gamma, cumhaz.to_survival())
    raise InvalidInput(f"unknown censoring model kind {kind!r}; expected one of {CENSORING_KINDS}")
