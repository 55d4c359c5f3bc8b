"""Working regression models for failure times.

Three interchangeable models expose a conditional survival function
S(t | x) and its generalized inverse:

* Cox proportional hazards, fitted by Newton maximization of the Breslow-tie
  partial likelihood with the Breslow step-function baseline;
* Weibull AFT, S(t | x) = exp{-(t e^{-mu(x)})^{1/b}} with mu(x) = intercept + x beta;
* log-normal AFT, log T | x ~ Normal(mu(x), sigma^2);

both parametric fits by censored maximum likelihood. All fits use Newton
iterations with step-halving (up to 30 halvings), a relative log-likelihood
tolerance of 1e-8 and at most 100 iterations. Parametric fits start at the
least-squares estimates of log t on the uncensored rows; Cox starts at 0.

The Cox survival function cannot be inverted beyond the largest observed
failure time eta; such inversions return the explicit :class:`Capped`
sentinel instead of a number so callers can construct truncated intervals
deliberately.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .curves import CumulativeHazardCurve
from .data import Dataset
from .errors import FitDiverged, InvalidInput, SingularDesign

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_MAX_ITER = 100
_MAX_HALVINGS = 30
_REL_TOL = 1e-8
_LP_GUARD = 200.0  # linear predictors beyond this signal a monotone likelihood


@dataclass(frozen=True)
class Capped:
    """Sentinel for a survival inversion beyond the model's support limit."""

    eta: float


@dataclass(frozen=True)
class FitDiagnostics:
    log_likelihood: float
    iterations: int
    converged: bool


def _drop_zero_columns(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Exactly-zero covariate columns are unidentifiable but harmless: they are
    removed for fitting and reported with coefficient 0."""
    active = ~np.all(x == 0.0, axis=0) if x.shape[1] else np.zeros(0, dtype=bool)
    return x[:, active], active


def _check_full_rank(design: np.ndarray) -> None:
    if design.shape[1] == 0:
        return
    if np.linalg.matrix_rank(design) < design.shape[1]:
        raise SingularDesign("covariate matrix is collinear to working precision")


def _restore_coefficients(fitted: np.ndarray, active: np.ndarray) -> np.ndarray:
    full = np.zeros(active.size)
    full[active] = fitted
    return full


def _ascent_direction(hess: np.ndarray, grad: np.ndarray) -> np.ndarray:
    """Solve (-hess) step = grad, ridge-damping an indefinite Hessian.

    Away from the optimum the censored log-likelihoods are not globally
    concave; shifting the curvature matrix to positive definite keeps the
    step an ascent direction while leaving Newton behaviour untouched near
    the maximum.
    """
    neg_h = -hess
    smallest = float(np.linalg.eigvalsh(neg_h).min())
    if smallest <= 0.0:
        bump = -smallest + 1e-8 * (1.0 + float(np.abs(neg_h).max()))
        neg_h = neg_h + bump * np.eye(neg_h.shape[0])
    try:
        return np.linalg.solve(neg_h, grad)
    except np.linalg.LinAlgError as exc:
        raise SingularDesign("singular information matrix") from exc


def _newton_maximize(value_fn, derivs_fn, theta0: np.ndarray) -> tuple[np.ndarray, float, int]:
    """Maximize a log-likelihood; returns (theta_hat, ll, iterations).

    ``value_fn(theta)`` returns the log-likelihood alone (may be -inf or nan
    in overflow regions; such step candidates are rejected by halving);
    ``derivs_fn(theta)`` returns (ll, grad, hess) and is only called at
    accepted iterates.
    """
    theta = np.asarray(theta0, dtype=float)
    ll, grad, hess = derivs_fn(theta)
    if not np.isfinite(ll):
        raise FitDiverged("log-likelihood not finite at the starting values")
    if theta.size == 0:
        return theta, ll, 0
    for iteration in range(1, _MAX_ITER + 1):
        step = _ascent_direction(hess, grad)
        if not np.all(np.isfinite(step)):
            raise FitDiverged("non-finite Newton step")
        accepted = None
        factor = 1.0
        for _ in range(_MAX_HALVINGS + 1):
            candidate = theta + factor * step
            ll_new = value_fn(candidate)
            if np.isfinite(ll_new) and ll_new >= ll:
                accepted = (candidate, ll_new)
                break
            factor *= 0.5
        if accepted is None:
            if float(np.max(np.abs(grad))) < 1e-6 * (1.0 + abs(ll)):
                return theta, ll, iteration
            raise FitDiverged("step-halving failed to improve the log-likelihood")
        improvement = accepted[1] - ll
        theta = accepted[0]
        if improvement <= _REL_TOL * (1.0 + abs(accepted[1])):
            return theta, accepted[1], iteration
        ll, grad, hess = derivs_fn(theta)
    raise FitDiverged(f"no convergence in {_MAX_ITER} Newton iterations")


# ---------------------------------------------------------------------------
# Cox proportional hazards
# ---------------------------------------------------------------------------


class _CoxData:
    """Sorted/grouped views for the Breslow-tie partial likelihood."""

    def __init__(self, times, events, x, drop_tied_nonevents):
        order = np.argsort(times, kind="mergesort")
        self.x = np.asarray(x, dtype=float)[order]
        self.events = np.asarray(events, dtype=bool)[order]
        ts = np.asarray(times, dtype=float)[order]
        self.unique_times, self.group = np.unique(ts, return_inverse=True)
        self.m = self.unique_times.size
        self.p = self.x.shape[1]
        self.d = np.bincount(self.group[self.events], minlength=self.m).astype(float)
        self.event_groups = self.d > 0
        self.sum_x_events = np.zeros((self.m, self.p))
        np.add.at(self.sum_x_events, self.group[self.events], self.x[self.events])
        self.drop_tied_nonevents = drop_tied_nonevents

    def _risk_sums(self, w):
        g0 = np.bincount(self.group, weights=w, minlength=self.m)
        g1 = np.zeros((self.m, self.p))
        np.add.at(g1, self.group, w[:, None] * self.x)
        g2 = np.zeros((self.m, self.p, self.p))
        np.add.at(g2, self.group, w[:, None, None] * (self.x[:, :, None] * self.x[:, None, :]))
        s0 = g0[::-1].cumsum()[::-1]
        s1 = g1[::-1].cumsum(axis=0)[::-1]
        s2 = g2[::-1].cumsum(axis=0)[::-1]
        if self.drop_tied_nonevents:
            ne = ~self.events
            n0 = np.bincount(self.group[ne], weights=w[ne], minlength=self.m)
            n1 = np.zeros((self.m, self.p))
            np.add.at(n1, self.group[ne], w[ne, None] * self.x[ne])
            n2 = np.zeros((self.m, self.p, self.p))
            np.add.at(n2, self.group[ne], w[ne, None, None] * (self.x[ne, :, None] * self.x[ne, None, :]))
            s0, s1, s2 = s0 - n0, s1 - n1, s2 - n2
        return s0, s1, s2

    def ll_grad_hess(self, beta):
        lp = self.x @ beta if self.p else np.zeros(len(self.x))
        if lp.size and float(np.max(np.abs(lp))) > _LP_GUARD:
            return -np.inf, np.zeros(self.p), np.eye(max(self.p, 1))[: self.p, : self.p]
        w = np.exp(lp)
        s0, s1, s2 = self._risk_sums(w)
        eg = self.event_groups
        d_e, s0_e = self.d[eg], s0[eg]
        if np.any(s0_e <= 0):
            return -np.inf, np.zeros(self.p), np.eye(max(self.p, 1))[: self.p, : self.p]
        ll = float(lp[self.events].sum() - (d_e * np.log(s0_e)).sum())
        if self.p == 0:
            return ll, np.zeros(0), np.zeros((0, 0))
        xbar = s1[eg] / s0_e[:, None]
        grad = self.sum_x_events[eg].sum(axis=0) - (d_e[:, None] * xbar).sum(axis=0)
        vmat = s2[eg] / s0_e[:, None, None] - xbar[:, :, None] * xbar[:, None, :]
        hess = -(d_e[:, None, None] * vmat).sum(axis=0)
        return ll, grad, hess

    def breslow_baseline(self, beta) -> CumulativeHazardCurve:
        lp = self.x @ beta if self.p else np.zeros(len(self.x))
        s0, _, _ = self._risk_sums(np.exp(lp))
        eg = self.event_groups
        increments = self.d[eg] / s0[eg]
        return CumulativeHazardCurve(self.unique_times[eg], np.cumsum(increments))


def fit_cox_arrays(times, events, x, drop_tied_nonevents: bool = False):
    """Cox fit on raw arrays; returns (beta_full, baseline, diagnostics).

    ``drop_tied_nonevents`` removes tied non-event subjects from the risk set
    at their own time; used when the "events" are censorings so that tied
    failures exit first.
    """
    events = np.asarray(events, dtype=bool)
    if not events.any():
        raise InvalidInput("no events to fit a proportional hazards model on")
    x = np.asarray(x, dtype=float)
    x_active, active = _drop_zero_columns(x)
    if x_active.shape[1]:
        _check_full_rank(x_active - x_active.mean(axis=0))
    core = _CoxData(times, events, x_active, drop_tied_nonevents)
    beta_hat, ll, iterations = _newton_maximize(
        lambda b: core.ll_grad_hess(b)[0], core.ll_grad_hess, np.zeros(x_active.shape[1])
    )
    if x_active.shape[1] and float(np.max(np.abs(x_active @ beta_hat))) > _LP_GUARD / 2:
        raise FitDiverged("monotone partial likelihood (linear predictor unbounded)")
    baseline = core.breslow_baseline(beta_hat)
    beta_full = _restore_coefficients(beta_hat, active)
    return beta_full, baseline, FitDiagnostics(ll, iterations, True)


@dataclass(frozen=True)
class CoxModelFit:
    """Fitted proportional hazards working model."""

    beta: np.ndarray
    baseline: CumulativeHazardCurve
    eta: float
    diagnostics: FitDiagnostics

    variant = "cox"

    def __post_init__(self):
        b = np.array(np.asarray(self.beta, dtype=float), copy=True)
        b.setflags(write=False)
        object.__setattr__(self, "beta", b)

    def linear_predictor(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return x @ self.beta if self.beta.size else np.zeros(x.shape[0])

    def survival(self, t: float, x) -> float:
        return float(self.survival_many(np.asarray([t], dtype=float), np.atleast_2d(x))[0])

    def survival_many(self, times, x) -> np.ndarray:
        if np.any(np.asarray(times) < 0):
            raise InvalidInput("times must be nonnegative")
        cumhaz = np.asarray(self.baseline.value(times), dtype=float)
        return np.exp(-cumhaz * np.exp(self.linear_predictor(x)))

    def inverse_survival(self, u: float, x) -> float | Capped:
        times, capped = self.inverse_survival_many(u, np.atleast_2d(x))
        return Capped(self.eta) if bool(capped[0]) else float(times[0])

    def inverse_survival_many(self, u, x) -> tuple[np.ndarray, np.ndarray]:
        """Generalized inverse inf{t : S(t | x) <= u}; capped entries report eta."""
        u_arr = np.atleast_1d(np.asarray(u, dtype=float))
        if np.any(u_arr <= 0) or np.any(u_arr > 1):
            raise InvalidInput("survival level must be in (0, 1]")
        targets = -np.log(u_arr) * np.exp(-self.linear_predictor(x))
        times, capped = self.baseline.inverse(targets)
        return np.where(capped, self.eta, times), capped


def fit_cox(data: Dataset) -> CoxModelFit:
    """Maximum partial likelihood Cox fit with the Breslow baseline.

    Raises
    ------
    FitDiverged
        Newton failed or the partial likelihood is monotone.
    SingularDesign
        Collinear covariates (exactly-zero columns are instead dropped and
        reported with coefficient 0).
    """
    beta, baseline, diag = fit_cox_arrays(data.times, data.events, data.covariates)
    return CoxModelFit(beta, baseline, data.eta, diag)


# ---------------------------------------------------------------------------
# Parametric AFT models
# ---------------------------------------------------------------------------


def _reject_region(params) -> bool:
    # Step candidates with absurd scale parameters are rejected outright;
    # |log scale| > 50 only arises from runaway Newton steps.
    return not np.all(np.isfinite(params)) or abs(float(params[-1])) > 50.0


def lognormal_loglik_grad(params, log_times, design, events):
    """Censored log-normal log-likelihood and its analytic score.

    ``params`` is (coefficients..., log sigma); ``design`` includes the
    intercept column.
    """
    if _reject_region(params):
        return -math.inf, np.zeros(len(params))
    a, s = params[:-1], params[-1]
    sigma = math.exp(s)
    z = (log_times - design @ a) / sigma
    log_pdf = -0.5 * z * z - _LOG_SQRT_2PI
    log_sf = special.log_ndtr(-z)
    ll = float(np.sum(np.where(events, -s - log_times + log_pdf, log_sf)))
    hazard = np.exp(log_pdf - log_sf)
    per_row = np.where(events, z, hazard)
    grad_a = design.T @ per_row / sigma
    grad_s = float(np.sum(np.where(events, z * z - 1.0, z * hazard)))
    return ll, np.append(grad_a, grad_s)


def weibull_loglik_grad(params, log_times, design, events):
    """Censored Weibull AFT log-likelihood and its analytic score.

    ``params`` is (coefficients..., log b) for S(t) = exp{-(t e^{-mu})^{1/b}}.
    """
    if _reject_region(params):
        return -math.inf, np.zeros(len(params))
    a, s = params[:-1], params[-1]
    b = math.exp(s)
    with np.errstate(over="ignore", invalid="ignore"):
        u = (log_times - design @ a) / b
        w = np.exp(np.minimum(u, 500.0))
        ll = float(np.sum(np.where(events, -s - log_times + u, 0.0)) - w.sum())
        grad_a = design.T @ (w - events) / b
        grad_s = float((u * w).sum() - (events * (1.0 + u)).sum())
    grad = np.append(grad_a, grad_s)
    if not np.all(np.isfinite(grad)):
        return -math.inf, np.zeros(len(params))
    return ll, grad


def _fd_hessian(grad_fn, theta: np.ndarray) -> np.ndarray:
    k = theta.size
    hess = np.zeros((k, k))
    for j in range(k):
        eps = 1e-5 * (1.0 + abs(float(theta[j])))
        up, down = theta.copy(), theta.copy()
        up[j] += eps
        down[j] -= eps
        hess[:, j] = (grad_fn(up) - grad_fn(down)) / (2.0 * eps)
    return 0.5 * (hess + hess.T)


def _fit_aft(data: Dataset, ll_grad, scale_start_factor: float):
    x_active, active = _drop_zero_columns(data.covariates)
    design = np.column_stack([np.ones(data.n), x_active])
    _check_full_rank(design)
    log_times = np.log(data.times)
    events = data.events.astype(float)

    uncensored = data.events
    coeffs0, *_ = np.linalg.lstsq(design[uncensored], log_times[uncensored], rcond=None)
    resid = log_times[uncensored] - design[uncensored] @ coeffs0
    scale0 = max(float(resid.std()) * scale_start_factor, 0.05)
    theta0 = np.append(coeffs0, math.log(scale0))

    def derivs(theta):
        ll, grad = ll_grad(theta, log_times, design, events)
        return ll, grad, _fd_hessian(lambda t: ll_grad(t, log_times, design, events)[1], theta)

    theta_hat, ll, iterations = _newton_maximize(
        lambda t: ll_grad(t, log_times, design, events)[0], derivs, theta0
    )
    coeffs = np.append(theta_hat[0], _restore_coefficients(theta_hat[1:-1], active))
    return coeffs, float(theta_hat[-1]), FitDiagnostics(ll, iterations, True)


@dataclass(frozen=True)
class WeibullModelFit:
    """Weibull AFT working model: S(t | x) = exp{-(t e^{-mu(x)})^{1/b}}."""

    coefficients: np.ndarray  # intercept first
    log_scale: float  # log b
    diagnostics: FitDiagnostics

    variant = "weibull"

    def __post_init__(self):
        c = np.array(np.asarray(self.coefficients, dtype=float), copy=True)
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    @property
    def scale(self) -> float:
        return math.exp(self.log_scale)

    def linear_predictor(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return self.coefficients[0] + (x @ self.coefficients[1:] if x.shape[1] else 0.0)

    def survival(self, t: float, x) -> float:
        return float(self.survival_many(np.asarray([t], dtype=float), np.atleast_2d(x))[0])

    def survival_many(self, times, x) -> np.ndarray:
        t = np.asarray(times, dtype=float)
        if np.any(t < 0):
            raise InvalidInput("times must be nonnegative")
        mu = self.linear_predictor(x)
        with np.errstate(divide="ignore"):
            u = (np.log(t) - mu) / self.scale
        return np.exp(-np.exp(np.minimum(u, 500.0)))

    def inverse_survival(self, u: float, x) -> float:
        return float(self.inverse_survival_many(u, np.atleast_2d(x))[0][0])

    def inverse_survival_many(self, u, x) -> tuple[np.ndarray, np.ndarray]:
        u_arr = np.atleast_1d(np.asarray(u, dtype=float))
        if np.any(u_arr <= 0) or np.any(u_arr > 1):
            raise InvalidInput("survival level must be in (0, 1]")
        mu = self.linear_predictor(x)
        with np.errstate(divide="ignore"):
            times = np.exp(mu) * (-np.log(u_arr)) ** self.scale
        return times, np.zeros(times.shape, dtype=bool)


@dataclass(frozen=True)
class LogNormalModelFit:
    """Log-normal AFT working model: log T | x ~ Normal(mu(x), sigma^2)."""

    coefficients: np.ndarray  # intercept first
    sigma: float
    diagnostics: FitDiagnostics

    variant = "lognormal"

    def __post_init__(self):
        c = np.array(np.asarray(self.coefficients, dtype=float), copy=True)
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)
        if self.sigma <= 0:
            raise InvalidInput("sigma must be positive")

    def linear_predictor(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return self.coefficients[0] + (x @ self.coefficients[1:] if x.shape[1] else 0.0)

    def survival(self, t: float, x) -> float:
        return float(self.survival_many(np.asarray([t], dtype=float), np.atleast_2d(x))[0])

    def survival_many(self, times, x) -> np.ndarray:
        t = np.asarray(times, dtype=float)
        if np.any(t < 0):
            raise InvalidInput("times must be nonnegative")
        mu = self.linear_predictor(x)
        with np.errstate(divide="ignore"):
            z = (np.log(t) - mu) / self.sigma
        return special.ndtr(-z)

    def inverse_survival(self, u: float, x) -> float:
        return float(self.inverse_survival_many(u, np.atleast_2d(x))[0][0])

    def inverse_survival_many(self, u, x) -> tuple[np.ndarray, np.ndarray]:
        u_arr = np.atleast_1d(np.asarray(u, dtype=float))
        if np.any(u_arr <= 0) or np.any(u_arr > 1):
            raise InvalidInput("survival level must be in (0, 1]")
        mu = self.linear_predictor(x)
        times = np.exp(mu + self.sigma * special.ndtri(1.0 - u_arr))
        return times, np.zeros(times.shape, dtype=bool)


WorkingModelFit = CoxModelFit | WeibullModelFit | LogNormalModelFit

WORKING_MODELS = ("cox", "weibull", "lognormal")


def fit_weibull(data: Dataset) -> WeibullModelFit:
    """Censored maximum likelihood Weibull AFT fit (intercept included)."""
    coeffs, log_scale, diag = _fit_aft(data, weibull_loglik_grad, math.sqrt(6.0) / math.pi)
    return WeibullModelFit(coeffs, log_scale, diag)


def fit_lognormal(data: Dataset) -> LogNormalModelFit:
    """Censored maximum likelihood log-normal AFT fit (intercept included)."""
    coeffs, log_sigma, diag = _fit_aft(data, lognormal_loglik_grad, 1.0)
    return LogNormalModelFit(coeffs, math.exp(log_sigma), diag)


def fit_working_model(data: Dataset, kind: str) -> WorkingModelFit:
    """Dispatch on the working-model name ("cox", "weibull" or "lognormal")."""
    if kind == "cox":
        return fit_cox(data)
    if kind == "weibull":
        return fit_weibull(data)
    if kind == "lognormal":
        return fit_lognormal(data)
    raise InvalidInput(f"unknown working model {kind!r}; expected one of {WORKING_MODELS}")
