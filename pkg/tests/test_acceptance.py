"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line (run with ``pytest tests/test_acceptance.py -v -s``).

The coverage studies target the two-sided 90% level; interval lengths are
generative-config-relative, so only coverage values and length orderings are
asserted. The generative coefficients live here, in one place, so every
desk-scale study is reproducible from this file alone.
"""

import json
import math

import numpy as np
import pytest
from scipy import stats

from confsurv.censoring import fit_censoring_model
from confsurv.cli import run
from confsurv.conformal import (
    ConformalConfig,
    calibrate,
    calibrate_remaining,
    interval_bounds,
    predict_interval,
    remaining_lifetime_interval,
    shift_diagnostic,
    split_validate,
)
from confsurv.data import Dataset
from confsurv.ipcw import ipcw_joint_sample
from confsurv.kaplan_meier import km_estimate
from confsurv.models import fit_cox, fit_lognormal, fit_weibull, fit_working_model
from confsurv.rng import RandomStream
from confsurv.simulation import (
    GenerativeConfig,
    _draw_covariates,
    _draw_failure_times,
    generate,
    resolve_tau_c,
    run_study,
)

from conftest import random_censored_dataset

DESK = dict(n_train=1000, n_test=1000, n_reps=200)
B = 2000
ALPHA = 0.10
CPI_METHODS = ("cpi-lognormal", "cpi-weibull", "cpi-cox")

# Shared failure-law coefficients for the independent-censoring studies.
STUDY_BETA = (1.2, 0.1, -0.4, 0.3)

# Covariate-dependent censoring studies: proportional hazards on a uniform
# baseline, strongly aligned with the Weibull failure law (so ignoring the
# covariates biases the weights) and orthogonal to the log-normal one (so
# the marginal weights stay harmless there).
DEPCENS_GAMMA = (-1.5, -0.4, 0.0, 0.0)
DEPCENS_RATE = 0.45
DEPCENS_WEIBULL_BETA = (1.2, 0.25, -0.4, 0.3)
DEPCENS_LOGNORMAL_BETA = (0.0, 0.0, -0.2, 1.2)


def report(criterion: str, ok: bool, detail: str) -> None:
    print(f"{'PASS' if ok else 'FAIL'} {criterion}: {detail}")
    assert ok, f"{criterion}: {detail}"


def coverage_summary(report_rows) -> str:
    return "  ".join(
        f"{r.method}: cov={r.coverage:.3f} len={r.length_mean:.2f} "
        f"cov_min={r.coverage_min_eta:.3f}"
        for r in report_rows
    )


class TestCriterion1LightCensoringCoverage:
    def test_weibull_15_percent(self):
        cfg = GenerativeConfig(
            failure_family="weibull", beta=STUDY_BETA, weibull_shape=2.0,
            target_censoring_rate=0.15, seed=101, **DESK,
        )
        rep = run_study(cfg, CPI_METHODS, ALPHA, RandomStream(101), n_bootstrap=B)
        rows = {r.method: r for r in rep.rows}
        cov_ok = all(abs(rows[m].coverage - 0.90) <= 0.03 for m in CPI_METHODS)
        cox_len = rows["cpi-cox"].length_mean
        order_ok = cox_len < rows["cpi-weibull"].length_mean and cox_len < rows["cpi-lognormal"].length_mean
        ok = cov_ok and order_ok and all(rows[m].n_failed == 0 for m in CPI_METHODS)
        report("criterion 1 (Weibull data, 15% censoring)", ok, coverage_summary(rep.rows))


class TestCriterion2HeavyCensoringDegradation:
    def test_lognormal_50_percent(self):
        cfg = GenerativeConfig(
            failure_family="lognormal", beta=STUDY_BETA, lognormal_sigma=0.4,
            target_censoring_rate=0.50, seed=102, **DESK,
        )
        rep = run_study(cfg, CPI_METHODS, ALPHA, RandomStream(102), n_bootstrap=B)
        rows = {r.method: r for r in rep.rows}
        cox_under = rows["cpi-cox"].coverage <= 0.80
        parametric_ok = all(
            abs(rows[m].coverage - 0.89) <= 0.03 for m in ("cpi-lognormal", "cpi-weibull")
        )
        min_eta_ok = all(abs(rows[m].coverage_min_eta - 0.90) <= 0.03 for m in CPI_METHODS)
        ok = cox_under and parametric_ok and min_eta_ok
        report("criterion 2 (log-normal data, 50% censoring)", ok, coverage_summary(rep.rows))


class TestCriterion3CovariateDependentCensoring:
    def _study(self, family, beta, censoring_kind, seed, **kw):
        cfg = GenerativeConfig(
            failure_family=family, beta=beta,
            censoring_family="covariate_cox", censoring_gamma=DEPCENS_GAMMA,
            target_censoring_rate=DEPCENS_RATE, seed=seed, **kw, **DESK,
        )
        rep = run_study(
            cfg, ("cpi-lognormal",), ALPHA, RandomStream(seed),
            n_bootstrap=B, censoring_kind=censoring_kind,
        )
        return rep.rows[0].coverage

    def test_covariate_dependent_censoring_pattern(self):
        wb_regression = self._study("weibull", DEPCENS_WEIBULL_BETA, "regression", 103, weibull_shape=2.0)
        wb_marginal = self._study("weibull", DEPCENS_WEIBULL_BETA, "marginal", 104, weibull_shape=2.0)
        ln_regression = self._study("lognormal", DEPCENS_LOGNORMAL_BETA, "regression", 105, lognormal_sigma=0.4)
        ln_marginal = self._study("lognormal", DEPCENS_LOGNORMAL_BETA, "marginal", 106, lognormal_sigma=0.4)
        ok = (
            abs(wb_regression - 0.90) <= 0.03
            and wb_marginal <= 0.87
            and abs(ln_regression - 0.90) <= 0.03
            and abs(ln_marginal - 0.90) <= 0.03
        )
        report(
            "criterion 3 (covariate-dependent censoring)",
            ok,
            f"weibull: regr={wb_regression:.3f} marg={wb_marginal:.3f}; "
            f"lognormal: regr={ln_regression:.3f} marg={ln_marginal:.3f}",
        )


class TestCriterion4IpcwKmIdentity:
    def test_identity_on_random_small_datasets(self):
        gen = np.random.default_rng(404)
        worst = 0.0
        for _ in range(1000):
            d = random_censored_dataset(gen, max_n=50)
            sample = ipcw_joint_sample(d, fit_censoring_model(d, "marginal"))
            km_cdf = 1.0 - np.asarray(km_estimate(d).value(d.times))
            gap = float(np.max(np.abs(sample.implied_marginal_cdf(d.times) - km_cdf)))
            worst = max(worst, gap)
        report("criterion 4 (IPCW-KM identity)", worst < 1e-12, f"max gap {worst:.2e} over 1000 datasets")


class TestCriterion5PitAndShiftDiagnostic:
    @pytest.mark.parametrize(
        "family,working_model,seed",
        [("lognormal", "lognormal", 501), ("weibull", "weibull", 502), ("weibull", "cox", 503)],
    )
    def test_uniform_scores_without_censoring(self, family, working_model, seed):
        cfg = GenerativeConfig(
            failure_family=family, beta=STUDY_BETA, lognormal_sigma=0.4,
            tau_c=math.inf, n_train=5000, n_test=5000, n_reps=1, seed=seed,
        )
        sim = generate(cfg, RandomStream(seed).substream(0))
        fit = fit_working_model(sim.train, working_model)
        scores = fit.survival_many(sim.test_times, sim.test_covariates)
        ks = stats.kstest(scores, "uniform")
        critical = 1.6276 / math.sqrt(scores.size)  # 1% asymptotic level
        grid = np.linspace(0.01, 0.99, 99)
        psi = shift_diagnostic(sim.train, fit, fit_censoring_model(sim.train, "marginal"), grid)
        psi_gap = float(np.max(np.abs(psi - grid)))
        ok = ks.statistic < critical and psi_gap < 0.03
        report(
            f"criterion 5 (PIT, {working_model} on {family})",
            ok,
            f"KS={ks.statistic:.4f} < {critical:.4f}; max|psi-u|={psi_gap:.4f} < 0.03",
        )


class TestCriterion6RemainingLifetime:
    def test_coverage_among_survivors(self):
        cfg = resolve_tau_c(
            GenerativeConfig(
                failure_family="lognormal", beta=STUDY_BETA, lognormal_sigma=0.4,
                target_censoring_rate=0.15, seed=601, **DESK,
            )
        )
        gen = RandomStream(606).generator
        x_pop = _draw_covariates(gen, 400_000)
        median = float(np.median(_draw_failure_times(cfg, gen, x_pop)))
        ccfg = ConformalConfig(alpha=ALPHA, n_bootstrap=B, working_model="lognormal")
        covs = []
        for r in range(cfg.n_reps):
            rng = RandomStream(601).substream(r)
            sim = generate(cfg, rng.substream(0))
            cal = calibrate_remaining(sim.train, median, ccfg, rng.substream(1))
            survivors = sim.test_times > median
            lower, upper, _ = interval_bounds(cal, sim.test_covariates[survivors])
            t = sim.test_times[survivors]
            covs.append(float(((lower <= t) & (t <= upper)).mean()))
        coverage = float(np.mean(covs))
        ok = abs(coverage - 0.90) <= 0.03
        report(
            "criterion 6 (remaining-lifetime coverage)",
            ok,
            f"coverage {coverage:.3f} among survivors past the population median {median:.2f}",
        )

    def test_zero_conditioning_time_bit_exact(self):
        cfg = resolve_tau_c(
            GenerativeConfig(
                failure_family="lognormal", beta=STUDY_BETA, lognormal_sigma=0.4,
                target_censoring_rate=0.15, n_train=500, n_test=5, n_reps=1, seed=602,
            )
        )
        sim = generate(cfg, RandomStream(602).substream(0))
        ccfg = ConformalConfig(alpha=ALPHA, n_bootstrap=500, working_model="cox")
        direct = predict_interval(calibrate(sim.train, ccfg, RandomStream(603)), sim.test_covariates[0])
        conditional = remaining_lifetime_interval(
            sim.train, 0.0, sim.test_covariates[0], ccfg, RandomStream(603)
        )
        report(
            "criterion 6b (c_L = 0 reproduces the plain interval bit-exactly)",
            direct == conditional,
            f"[{direct.lower!r}, {direct.upper!r}] == [{conditional.lower!r}, {conditional.upper!r}]",
        )


class TestCriterion7SplitValidation:
    def test_mean_coverage_over_100_splits(self):
        cfg = resolve_tau_c(
            GenerativeConfig(
                failure_family="weibull", beta=STUDY_BETA, weibull_shape=2.0,
                target_censoring_rate=0.15, n_train=2000, n_test=10, n_reps=1, seed=701,
            )
        )
        sim = generate(cfg, RandomStream(701).substream(0))
        ccfg = ConformalConfig(alpha=ALPHA, n_bootstrap=B, working_model="cox")
        result = split_validate(sim.train, ccfg, 100, 0.7, RandomStream(702))
        ok = abs(result.mean_coverage - 0.90) <= 0.03
        report(
            "criterion 7 (split validation)",
            ok,
            f"mean coverage {result.mean_coverage:.3f} (sd {result.sd_coverage:.3f}) over 100 splits",
        )


class TestCriterion8OracleEquivalence:
    def test_cox_against_dense_grid(self):
        d = Dataset([1.0, 2.0, 3.0, 4.0], [True] * 4, [[1.0], [0.0], [1.0], [0.0]])
        grid = np.arange(-5.0, 5.0, 1e-4)
        ll = (
            2 * grid
            - np.log(2 + 2 * np.exp(grid))
            - np.log(2 + np.exp(grid))
            - np.log(1 + np.exp(grid))
        )
        oracle = float(grid[np.argmax(ll)])
        fit = fit_cox(d)
        gap = abs(float(fit.beta[0]) - oracle)
        report("criterion 8a (Cox vs grid search)", gap < 1e-3, f"|beta - oracle| = {gap:.2e}")

    @staticmethod
    def _weibull_grid_loglik(mu, b, t, delta):
        lt = np.log(t)
        u = (lt[None, None, :] - mu[:, :, None]) / b[:, :, None]
        return (delta * (-np.log(b[:, :, None]) - lt[None, None, :] + u) - np.exp(u)).sum(axis=2)

    def test_weibull_against_two_stage_grid(self):
        t = np.array([1.0, 2.0, 3.0])
        delta = np.array([1.0, 0.0, 1.0])
        mus = np.linspace(-2.0, 3.0, 501)
        bs = np.linspace(0.05, 4.0, 501)
        m, bb = np.meshgrid(mus, bs, indexing="ij")
        coarse = self._weibull_grid_loglik(m, bb, t, delta)
        i, j = np.unravel_index(np.argmax(coarse), coarse.shape)
        mus = np.arange(mus[i] - 0.05, mus[i] + 0.05, 1e-4)
        bs = np.arange(max(bs[j] - 0.05, 1e-3), bs[j] + 0.05, 1e-4)
        m, bb = np.meshgrid(mus, bs, indexing="ij")
        fine = self._weibull_grid_loglik(m, bb, t, delta)
        i, j = np.unravel_index(np.argmax(fine), fine.shape)
        mu_star, b_star = float(mus[i]), float(bs[j])
        fit = fit_weibull(Dataset(t, delta.astype(bool), np.empty((3, 0))))
        gaps = (abs(float(fit.coefficients[0]) - mu_star), abs(fit.scale - b_star))
        ok = max(gaps) < 1e-3
        report(
            "criterion 8b (Weibull vs 2-D grid search)",
            ok,
            f"|mu-oracle|={gaps[0]:.2e}, |b-oracle|={gaps[1]:.2e}",
        )

    def test_lognormal_against_analytic_mle(self):
        gen = np.random.default_rng(808)
        t = gen.lognormal(0.2, 0.9, 400)
        fit = fit_lognormal(Dataset(t, [True] * 400, np.empty((400, 0))))
        lt = np.log(t)
        gaps = (abs(float(fit.coefficients[0]) - lt.mean()), abs(fit.sigma - lt.std()))
        ok = max(gaps) < 1e-3
        report(
            "criterion 8c (log-normal vs analytic MLE)",
            ok,
            f"|mu-mle|={gaps[0]:.2e}, |sigma-mle|={gaps[1]:.2e}",
        )


class TestCriterion9CliDeterminism:
    def _write_csvs(self, tmp_path):
        cfg = resolve_tau_c(
            GenerativeConfig(
                failure_family="weibull", beta=STUDY_BETA,
                target_censoring_rate=0.15, n_train=250, n_test=6, n_reps=1, seed=901,
            )
        )
        sim = generate(cfg, RandomStream(901).substream(0))
        train = tmp_path / "train.csv"
        lines = ["time,event,x1,x2,x3,x4"]
        for t, e, x in zip(sim.train.times, sim.train.events, sim.train.covariates):
            lines.append(",".join([repr(float(t)), str(int(e))] + [repr(float(v)) for v in x]))
        train.write_text("\n".join(lines) + "\n")
        newx = tmp_path / "newx.csv"
        newx.write_text(
            "x1,x2,x3,x4\n"
            + "\n".join(",".join(repr(float(v)) for v in row) for row in sim.test_covariates)
            + "\n"
        )
        return train, newx

    def test_simulate_byte_identical(self, tmp_path):
        cfg_path = tmp_path / "sim.json"
        cfg_path.write_text(json.dumps({"n_train": 200, "n_test": 200}))
        outs = []
        for name in ("s1", "s2"):
            out = tmp_path / name
            assert run([
                "simulate", "--config", str(cfg_path), "--out", str(out),
                "--reps", "3", "--seed", "11", "--B", "300", "--methods", "cpi-cox", "km",
            ]) == 0
            outs.append(out)
        same = all(
            (outs[0] / f).read_bytes() == (outs[1] / f).read_bytes()
            for f in ("report.csv", "report.json", "lengths.csv")
        )
        report("criterion 9a (simulate byte-identical)", same, "two seeded runs compared")

    def test_fit_predict_byte_identical(self, tmp_path):
        train, newx = self._write_csvs(tmp_path)
        blobs = []
        for tag in ("1", "2"):
            model = tmp_path / f"m{tag}.json"
            out = tmp_path / f"iv{tag}.csv"
            assert run(["fit", "--input", str(train), "--out", str(model),
                        "--working-model", "cox", "--B", "400", "--seed", "77"]) == 0
            assert run(["predict", "--model", str(model), "--input", str(newx),
                        "--out", str(out), "--c-l", "1.0"]) == 0
            blobs.append((model.read_bytes(), out.read_bytes()))
        same = blobs[0] == blobs[1]
        report("criterion 9b (fit+predict byte-identical)", same, "model and interval artifacts compared")
