"""Right-censored observations and datasets.

A dataset row is ``(time, event, covariates, site)`` where ``event`` is True
when the failure was observed and False when the subject was censored at
``time``. Datasets are immutable; the numpy views they expose are read-only.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidInput


@dataclass(frozen=True)
class Observation:
    """One right-censored observation."""

    time: float
    event: bool
    covariates: tuple[float, ...]
    site: int | None = None


class Dataset:
    """Immutable right-censored training corpus.

    Parameters
    ----------
    times : array-like of shape (n,)
        Observed times, strictly positive and finite.
    events : array-like of shape (n,)
        True where the failure was observed.
    covariates : array-like of shape (n, p)
        Covariate matrix; p may be zero.
    sites : array-like of shape (n,), optional
        Integer site labels; either every row has one or none does.
    covariate_names : sequence of str, optional
        Defaults to ``x1..xp``.
    """

    def __init__(self, times, events, covariates, sites=None, covariate_names=None):
        t = np.array(np.asarray(times, dtype=float), copy=True)
        e = np.array(np.asarray(events, dtype=bool), copy=True)
        x = np.array(np.asarray(covariates, dtype=float), copy=True)
        if x.ndim == 1:
            x = x.reshape(len(t), -1) if x.size else x.reshape(len(t), 0)
        if t.ndim != 1 or e.shape != t.shape or x.shape[0] != t.shape[0]:
            raise InvalidInput("times, events and covariates must agree on the row count")
        if t.size == 0:
            raise InvalidInput("dataset must not be empty")
        if not np.all(np.isfinite(t)) or np.any(t <= 0):
            raise InvalidInput("times must be positive and finite")
        if x.size and not np.all(np.isfinite(x)):
            raise InvalidInput("covariates must be finite")
        if not e.any():
            raise InvalidInput("dataset must contain at least one observed failure")
        s = None
        if sites is not None:
            s_arr = np.asarray(sites, dtype=object)
            if s_arr.shape != t.shape:
                raise InvalidInput("sites must match the row count")
            missing = np.array([v is None for v in s_arr])
            if missing.all():
                s = None
            elif missing.any():
                raise InvalidInput("either every row carries a site label or none does")
            else:
                s = np.array([int(v) for v in s_arr], dtype=np.int64)
        if covariate_names is None:
            names = tuple(f"x{j + 1}" for j in range(x.shape[1]))
        else:
            names = tuple(str(n) for n in covariate_names)
            if len(names) != x.shape[1]:
                raise InvalidInput("covariate_names must match the covariate count")
        for arr in (t, e, x) + ((s,) if s is not None else ()):
            arr.setflags(write=False)
        self._times = t
        self._events = e
        self._covariates = x
        self._sites = s
        self._names = names

    @classmethod
    def from_rows(cls, rows: Iterable[Observation], covariate_names: Sequence[str] | None = None) -> "Dataset":
        rows = list(rows)
        if not rows:
            raise InvalidInput("dataset must not be empty")
        p = len(rows[0].covariates)
        if any(len(r.covariates) != p for r in rows):
            raise InvalidInput("all rows must have the same covariate count")
        return cls(
            times=[r.time for r in rows],
            events=[r.event for r in rows],
            covariates=[list(r.covariates) for r in rows] if p else np.empty((len(rows), 0)),
            sites=[r.site for r in rows],
            covariate_names=covariate_names,
        )

    @property
    def times(self) -> np.ndarray:
        return self._times

    @property
    def events(self) -> np.ndarray:
        return self._events

    @property
    def covariates(self) -> np.ndarray:
        return self._covariates

    @property
    def sites(self) -> np.ndarray | None:
        return self._sites

    @property
    def covariate_names(self) -> tuple[str, ...]:
        return self._names

    @property
    def n(self) -> int:
        return int(self._times.size)

    @property
    def n_events(self) -> int:
        return int(self._events.sum())

    @property
    def p(self) -> int:
        return int(self._covariates.shape[1])

    @property
    def censoring_rate(self) -> float:
        return 1.0 - self.n_events / self.n

    @cached_property
    def eta(self) -> float:
        """Largest observed failure time."""
        return float(self._times[self._events].max())

    @cached_property
    def rows(self) -> tuple[Observation, ...]:
        sites = self._sites if self._sites is not None else [None] * self.n
        return tuple(
            Observation(float(t), bool(e), tuple(map(float, x)), None if s is None else int(s))
            for t, e, x, s in zip(self._times, self._events, self._covariates, sites)
        )

    def subset(self, index) -> "Dataset":
        """Row subset (keeps covariate names; validates the usual invariants)."""
        idx = np.asarray(index)
        return Dataset(
            self._times[idx],
            self._events[idx],
            self._covariates[idx],
            None if self._sites is None else self._sites[idx],
            self._names,
        )

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"Dataset(n={self.n}, events={self.n_events}, p={self.p})"
