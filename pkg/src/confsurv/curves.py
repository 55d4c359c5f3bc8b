"""Right-continuous step functions used throughout the package.

:class:`StepSurvivalCurve` holds survival-type curves (Kaplan-Meier
estimates, censoring survival baselines): nonincreasing, starting at 1.
:class:`CumulativeHazardCurve` holds Breslow-type baselines: nondecreasing,
starting at 0. Both evaluate right-continuously, expose left limits, and
stay constant beyond their last jump.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput


def _as_readonly(a) -> np.ndarray:
    arr = np.asarray(a, dtype=float)
    if arr.ndim != 1:
        raise InvalidInput("curve arrays must be one-dimensional")
    out = np.array(arr, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class StepSurvivalCurve:
    """Nonincreasing step function on [0, inf) with S(t) = 1 before the first jump.

    ``values[j]`` is the curve value at and after ``jump_times[j]`` (right
    continuity); the left limit at a jump is the previous value.
    """

    jump_times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "jump_times", _as_readonly(self.jump_times))
        object.__setattr__(self, "values", _as_readonly(self.values))
        t, v = self.jump_times, self.values
        if t.shape != v.shape:
            raise InvalidInput("jump_times and values must have equal length")
        if t.size:
            if not np.all(np.isfinite(t)) or np.any(t <= 0):
                raise InvalidInput("jump times must be positive and finite")
            if np.any(np.diff(t) <= 0):
                raise InvalidInput("jump times must be strictly ascending")
            if np.any(v < 0) or np.any(v > 1):
                raise InvalidInput("survival values must lie in [0, 1]")
            if np.any(np.diff(v) > 0):
                raise InvalidInput("survival values must be nonincreasing")

    def value(self, t) -> np.ndarray | float:
        """S(t), right-continuous; scalar in, scalar out."""
        t_arr = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.jump_times, t_arr, side="right") - 1
        padded = np.concatenate(([1.0], self.values))
        out = padded[idx + 1]
        return float(out) if np.isscalar(t) or t_arr.ndim == 0 else out

    def value_left(self, t) -> np.ndarray | float:
        """Left limit S(t-): jumps strictly before t only."""
        t_arr = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.jump_times, t_arr, side="left") - 1
        padded = np.concatenate(([1.0], self.values))
        out = padded[idx + 1]
        return float(out) if np.isscalar(t) or t_arr.ndim == 0 else out

    def cdf_quantile(self, q: float) -> tuple[float, bool]:
        """Generalized inverse of the CDF F = 1 - S: inf{t : F(t) >= q}.

        Returns ``(time, capped)``; ``capped`` is True when the curve never
        reaches q, in which case the last jump time is returned.
        """
        if not 0.0 < q <= 1.0:
            raise InvalidInput("quantile level must be in (0, 1]")
        cdf = 1.0 - self.values
        idx = int(np.searchsorted(cdf, q, side="left"))
        if idx >= cdf.size:
            if cdf.size == 0:
                raise InvalidInput("curve has no jumps; CDF quantile undefined")
            return float(self.jump_times[-1]), True
        return float(self.jump_times[idx]), False


@dataclass(frozen=True)
class CumulativeHazardCurve:
    """Nondecreasing step function with H(t) = 0 before the first jump."""

    jump_times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "jump_times", _as_readonly(self.jump_times))
        object.__setattr__(self, "values", _as_readonly(self.values))
        t, v = self.jump_times, self.values
        if t.shape != v.shape:
            raise InvalidInput("jump_times and values must have equal length")
        if t.size:
            if not np.all(np.isfinite(t)) or np.any(t <= 0):
                raise InvalidInput("jump times must be positive and finite")
            if np.any(np.diff(t) <= 0):
                raise InvalidInput("jump times must be strictly ascending")
            if np.any(v < 0) or np.any(np.diff(v) < 0):
                raise InvalidInput("cumulative hazard must be nonnegative and nondecreasing")

    def value(self, t) -> np.ndarray | float:
        t_arr = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.jump_times, t_arr, side="right") - 1
        padded = np.concatenate(([0.0], self.values))
        out = padded[idx + 1]
        return float(out) if np.isscalar(t) or t_arr.ndim == 0 else out

    def value_left(self, t) -> np.ndarray | float:
        t_arr = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.jump_times, t_arr, side="left") - 1
        padded = np.concatenate(([0.0], self.values))
        out = padded[idx + 1]
        return float(out) if np.isscalar(t) or t_arr.ndim == 0 else out

    @property
    def max_value(self) -> float:
        return float(self.values[-1]) if self.values.size else 0.0

    def inverse(self, target) -> tuple[np.ndarray, np.ndarray]:
        """inf{t : H(t) >= target}, vectorized.

        Returns ``(times, capped)`` where ``capped`` marks targets beyond the
        final cumulative hazard; capped entries get the last jump time (or 0
        for an empty curve). Targets <= 0 map to time 0.
        """
        tgt = np.atleast_1d(np.asarray(target, dtype=float))
        if self.values.size == 0:
            capped = tgt > 0
            return np.zeros_like(tgt), capped
        idx = np.searchsorted(self.values, tgt, side="left")
        capped = idx >= self.values.size
        idx_safe = np.minimum(idx, self.values.size - 1)
        times = self.jump_times[idx_safe]
        times = np.where(tgt <= 0, 0.0, np.where(capped, self.jump_times[-1], times))
        return times, capped

    def to_survival(self) -> StepSurvivalCurve:
        """exp(-H) as a survival step curve."""
        return StepSurvivalCurve(self.jump_times, np.exp(-self.values))
