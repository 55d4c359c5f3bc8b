"""Product-limit (Kaplan-Meier) estimation for failure and censoring times.

At tied times failures are processed before censorings: a subject censored
at t is still at risk for the failure at t, while a subject failing at t has
already left the risk set when the censorings at t occur. This convention
makes the inverse-censoring-weighted empirical CDF match the Kaplan-Meier
failure CDF exactly (see :mod:`confsurv.ipcw`).
"""

from __future__ import annotations

import numpy as np

from .curves import StepSurvivalCurve
from .data import Dataset
from .errors import InvalidInput

TARGETS = ("failure", "censoring")


def km_curve_from_arrays(times: np.ndarray, events: np.ndarray, target: str = "failure") -> StepSurvivalCurve:
    """Product-limit curve from raw arrays.

    ``events`` flags observed failures. With ``target="censoring"`` the roles
    are complemented and the risk set at a tied time excludes the subjects
    that failed there.
    """
    if target not in TARGETS:
        raise InvalidInput(f"target must be one of {TARGETS}")
    times = np.asarray(times, dtype=float)
    events = np.asarray(events, dtype=bool)
    if times.size == 0:
        raise InvalidInput("empty data")
    unique_times, inverse = np.unique(times, return_inverse=True)
    m = unique_times.size
    failures = np.bincount(inverse, weights=events.astype(float), minlength=m)
    censorings = np.bincount(inverse, weights=(~events).astype(float), minlength=m)
    at_risk = (failures + censorings)[::-1].cumsum()[::-1]

    if target == "failure":
        jumps = failures > 0
        factors = 1.0 - failures[jumps] / at_risk[jumps]
    else:
        jumps = censorings > 0
        risk = at_risk[jumps] - failures[jumps]
        factors = 1.0 - censorings[jumps] / risk
    return StepSurvivalCurve(unique_times[jumps], np.cumprod(factors))


def km_estimate(data: Dataset, target: str = "failure") -> StepSurvivalCurve:
    """Kaplan-Meier survival curve of the failure or the censoring time.

    Parameters
    ----------
    data : Dataset
    target : {"failure", "censoring"}
        With ``"censoring"`` the event indicator is complemented, so the
        curve estimates G(t) = P(C > t).

    Returns
    -------
    StepSurvivalCurve
        Jumps only at observed event times of the chosen target. A dataset
        with no censoring yields the constant curve G = 1 for
        ``target="censoring"``.

    Examples
    --------
    >>> d = Dataset([1.0, 2.0, 3.0], [True, False, True], np.empty((3, 0)))
    >>> km_estimate(d).value([1.0, 3.0]).tolist()
    [0.6666666666666667, 0.0]
    >>> km_estimate(d, "censoring").value(2.0)
    0.5
    """
    return km_curve_from_arrays(data.times, data.events, target)
