"""Inverse-censoring-weighted empirical joint distribution of (T, X).

The uncensored rows, reweighted by the inverse probability of remaining
uncensored just before their failure time, estimate the joint law of the
failure time and the covariates. Its marginal in t reproduces the
Kaplan-Meier failure CDF exactly (same data, marginal censoring model),
which is the identity the whole construction rests on. The normalized
weights double as resampling probabilities for the bootstrap conformal
scores.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .censoring import CensoringModel, StratifiedCensoringModel
from .data import Dataset
from .errors import InsufficientSupport, InvalidInput, WeightDegenerate
from .rng import RandomStream


@dataclass(frozen=True)
class WeightedPairSample:
    """Weighted uncensored pairs (t_i, x_i, w_i).

    ``weights`` are scaled so that the implied marginal CDF is
    (1/n_source) * sum_{t_i <= t} w_i; ``probabilities`` normalizes them for
    resampling.
    """

    times: np.ndarray
    covariates: np.ndarray
    weights: np.ndarray
    n_source: int

    def __post_init__(self):
        for name in ("times", "covariates", "weights"):
            arr = np.array(np.asarray(getattr(self, name), dtype=float), copy=True)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.times.size == 0:
            raise InvalidInput("weighted sample must contain at least one uncensored row")
        if np.any(self.weights <= 0) or not np.all(np.isfinite(self.weights)):
            raise InvalidInput("weights must be positive and finite")

    def __len__(self) -> int:
        return int(self.times.size)

    @cached_property
    def probabilities(self) -> np.ndarray:
        p = self.weights / self.weights.sum()
        p.setflags(write=False)
        return p

    def implied_marginal_cdf(self, eval_times) -> np.ndarray:
        """(1/n_source) * sum of weights with t_i <= t, per evaluation time."""
        order = np.argsort(self.times, kind="mergesort")
        sorted_times = self.times[order]
        cum_weights = np.concatenate(([0.0], np.cumsum(self.weights[order])))
        idx = np.searchsorted(sorted_times, np.asarray(eval_times, dtype=float), side="right")
        return cum_weights[idx] / self.n_source

    def restrict_above(self, threshold: float, minimum: int = 1) -> "WeightedPairSample":
        """Entries with t_i strictly above ``threshold`` (conditional resampling source).

        Returns ``self`` unchanged when every entry qualifies, so resampling
        paths are bit-identical to the unconditional ones.
        """
        mask = self.times > threshold
        qualifying = int(mask.sum())
        if qualifying < minimum:
            raise InsufficientSupport(
                f"only {qualifying} uncensored observations exceed {threshold}; need {minimum}"
            )
        if qualifying == len(self):
            return self
        return WeightedPairSample(
            self.times[mask], self.covariates[mask], self.weights[mask], self.n_source
        )

    def draw_indices(self, rng: RandomStream, size: int | None = None) -> np.ndarray | int:
        return rng.generator.choice(len(self), size=size, p=self.probabilities)


def ipcw_joint_sample(data: Dataset, cm: CensoringModel) -> WeightedPairSample:
    """Weighted uncensored pairs using left limits of the censoring model.

    With a marginal model the weight is 1 / G(Y_i-); with a stratified model
    the per-site empirical CDFs are averaged with equal site weight, giving
    w_i = n / (K * n_k * G_k(Y_i-)); with a regression model the weight is
    1 / G(Y_i- | x_i).

    Raises
    ------
    WeightDegenerate
        Some uncensored observation has G(Y_i-) = 0: the censoring support
        ends before the failure support. Callers should then use the
        eta-truncated interval variant.
    """
    uncensored = data.events
    times = data.times[uncensored]
    x = data.covariates[uncensored]
    sites = data.sites[uncensored] if data.sites is not None else None
    g_left = np.asarray(cm.survival_left(times, x, sites), dtype=float)
    if np.any(g_left <= 0):
        worst = float(times[np.argmin(g_left)])
        raise WeightDegenerate(
            f"censoring survival vanishes just before the observed failure at t={worst:g}"
        )
    weights = 1.0 / g_left
    if isinstance(cm, StratifiedCensoringModel):
        k = len(cm.site_sizes)
        size_per_row = np.array([cm.site_sizes[int(s)] for s in sites], dtype=float)
        weights = weights * data.n / (k * size_per_row)
    return WeightedPairSample(times, x, weights, data.n)


def sample_pair(sample: WeightedPairSample, rng: RandomStream) -> tuple[float, np.ndarray]:
    """Draw one (t, x) pair with the sample's normalized probabilities."""
    idx = int(sample.draw_indices(rng))
    return float(sample.times[idx]), sample.covariates[idx]
