"""JSON and CSV serialization for fitted models, calibrations, and reports.

Model records round-trip exactly: floats are written with ``repr`` fidelity
so a deserialized record predicts bit-identically to the in-memory one. CSVs
use a dot decimal separator and 17 significant digits, with the generating
seed and configuration embedded as leading comment lines.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .conformal import ConformalCalibration, ConformalConfig, PredictionInterval
from .curves import CumulativeHazardCurve
from .data import Dataset
from .errors import InvalidInput
from .models import (
    CoxModelFit,
    FitDiagnostics,
    LogNormalModelFit,
    WeibullModelFit,
    WorkingModelFit,
)
from .simulation import CoverageReport, GenerativeConfig

SCHEMA_VERSION = 1


def fmt17(x: float) -> str:
    """17-significant-digit decimal rendering used in CSV artifacts."""
    return format(float(x), ".17g")


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


# ---------------------------------------------------------------------------
# Working-model fits
# ---------------------------------------------------------------------------


def fit_to_dict(fit: WorkingModelFit) -> dict:
    diag = asdict(fit.diagnostics)
    if isinstance(fit, CoxModelFit):
        return {
            "variant": "cox",
            "beta": fit.beta.tolist(),
            "baseline_times": fit.baseline.jump_times.tolist(),
            "baseline_cumhaz": fit.baseline.values.tolist(),
            "eta": fit.eta,
            "diagnostics": diag,
        }
    if isinstance(fit, WeibullModelFit):
        return {
            "variant": "weibull",
            "coefficients": fit.coefficients.tolist(),
            "log_scale": fit.log_scale,
            "diagnostics": diag,
        }
    if isinstance(fit, LogNormalModelFit):
        return {
            "variant": "lognormal",
            "coefficients": fit.coefficients.tolist(),
            "sigma": fit.sigma,
            "diagnostics": diag,
        }
    raise InvalidInput(f"cannot serialize fit of type {type(fit).__name__}")


def fit_from_dict(d: dict) -> WorkingModelFit:
    diag = FitDiagnostics(**d["diagnostics"])
    variant = d["variant"]
    if variant == "cox":
        baseline = CumulativeHazardCurve(
            np.asarray(d["baseline_times"], dtype=float),
            np.asarray(d["baseline_cumhaz"], dtype=float),
        )
        return CoxModelFit(np.asarray(d["beta"], dtype=float), baseline, float(d["eta"]), diag)
    if variant == "weibull":
        return WeibullModelFit(np.asarray(d["coefficients"], dtype=float), float(d["log_scale"]), diag)
    if variant == "lognormal":
        return LogNormalModelFit(np.asarray(d["coefficients"], dtype=float), float(d["sigma"]), diag)
    raise InvalidInput(f"unknown fit variant {variant!r}")


# ---------------------------------------------------------------------------
# Calibrations, datasets, model records
# ---------------------------------------------------------------------------


def conformal_config_to_dict(cfg: ConformalConfig) -> dict:
    return asdict(cfg)


def conformal_config_from_dict(d: dict) -> ConformalConfig:
    return ConformalConfig(**d)


def calibration_to_dict(cal: ConformalCalibration) -> dict:
    return {
        "score_low": cal.score_low,
        "score_high": cal.score_high,
        "scores": cal.scores.tolist(),
        "theta_hat": fit_to_dict(cal.theta_hat),
        "theta_star": None if cal.theta_star is None else fit_to_dict(cal.theta_star),
        "eta": cal.eta,
        "config": conformal_config_to_dict(cal.config),
        "conditioning_time": cal.conditioning_time,
    }


def calibration_from_dict(d: dict) -> ConformalCalibration:
    return ConformalCalibration(
        score_low=float(d["score_low"]),
        score_high=float(d["score_high"]),
        scores=np.asarray(d["scores"], dtype=float),
        theta_hat=fit_from_dict(d["theta_hat"]),
        theta_star=None if d["theta_star"] is None else fit_from_dict(d["theta_star"]),
        eta=float(d["eta"]),
        config=conformal_config_from_dict(d["config"]),
        conditioning_time=float(d["conditioning_time"]),
    )


def dataset_to_dict(data: Dataset) -> dict:
    return {
        "time": data.times.tolist(),
        "event": data.events.astype(int).tolist(),
        "covariates": data.covariates.tolist(),
        "site": None if data.sites is None else data.sites.tolist(),
        "covariate_names": list(data.covariate_names),
    }


def dataset_from_dict(d: dict) -> Dataset:
    return Dataset(
        times=d["time"],
        events=[bool(e) for e in d["event"]],
        covariates=d["covariates"],
        sites=d["site"],
        covariate_names=d["covariate_names"],
    )


def covariate_metadata(data: Dataset) -> list[dict]:
    """Per-covariate UI metadata: binary columns are flagged for toggles."""
    meta = []
    for j, name in enumerate(data.covariate_names):
        col = data.covariates[:, j]
        values = np.unique(col)
        binary = values.size <= 2 and np.isin(values, (0.0, 1.0)).all()
        meta.append(
            {
                "name": name,
                "kind": "binary" if binary else "numeric",
                "min": float(col.min()),
                "max": float(col.max()),
            }
        )
    return meta


@dataclass(frozen=True)
class ModelRecord:
    """A persisted trained model: calibration, config, and training data.

    The training rows are retained so remaining-lifetime predictions (which
    recalibrate conditionally on the requested time) stay available after a
    round trip; record summaries never expose them.
    """

    model_id: str
    created_at: str | None
    seed: int
    config: ConformalConfig
    calibration: ConformalCalibration
    training_data: Dataset

    @property
    def covariate_names(self) -> tuple[str, ...]:
        return self.training_data.covariate_names

    def summary(self) -> dict:
        data = self.training_data
        return {
            "id": self.model_id,
            "created_at": self.created_at,
            "seed": self.seed,
            "config": conformal_config_to_dict(self.config),
            "covariate_names": list(data.covariate_names),
            "covariates": covariate_metadata(data),
            "training_summary": {
                "n": data.n,
                "events": data.n_events,
                "censoring_rate": data.censoring_rate,
                "eta": data.eta,
            },
        }


def model_id_for(data: Dataset, cfg: ConformalConfig, seed: int) -> str:
    """Content-addressed id: identical data, config and seed give the same id."""
    payload = canonical_json(
        {
            "data": dataset_to_dict(data),
            "config": conformal_config_to_dict(cfg),
            "seed": int(seed),
        }
    )
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def model_record_to_dict(record: ModelRecord) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "id": record.model_id,
        "created_at": record.created_at,
        "seed": record.seed,
        "config": conformal_config_to_dict(record.config),
        "calibration": calibration_to_dict(record.calibration),
        "training_data": dataset_to_dict(record.training_data),
    }


def model_record_from_dict(d: dict) -> ModelRecord:
    if d.get("schema_version") != SCHEMA_VERSION:
        raise InvalidInput(f"unsupported model schema version {d.get('schema_version')!r}")
    return ModelRecord(
        model_id=d["id"],
        created_at=d["created_at"],
        seed=int(d["seed"]),
        config=conformal_config_from_dict(d["config"]),
        calibration=calibration_from_dict(d["calibration"]),
        training_data=dataset_from_dict(d["training_data"]),
    )


def write_model_record(record: ModelRecord, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model_record_to_dict(record), indent=1) + "\n")


def read_model_record(path: str | Path) -> ModelRecord:
    return model_record_from_dict(json.loads(Path(path).read_text()))


# ---------------------------------------------------------------------------
# CSV artifacts
# ---------------------------------------------------------------------------


def _comment_header(seed: int, config: dict) -> str:
    return f"# seed: {seed}\n# config: {canonical_json(config)}\n"


def intervals_to_csv(intervals: list[PredictionInterval], seed: int, config: dict) -> str:
    lines = [_comment_header(seed, config) + "lower,upper,capped,alpha"]
    for iv in intervals:
        upper = "inf" if math.isinf(iv.upper) else fmt17(iv.upper)
        lines.append(f"{fmt17(iv.lower)},{upper},{int(iv.capped)},{fmt17(iv.alpha)}")
    return "\n".join(lines) + "\n"


def generative_config_to_dict(cfg: GenerativeConfig) -> dict:
    d = asdict(cfg)
    d["beta"] = list(d["beta"])
    d["censoring_gamma"] = list(d["censoring_gamma"])
    return d


def generative_config_from_dict(d: dict) -> GenerativeConfig:
    d = dict(d)
    if "beta" in d:
        d["beta"] = tuple(d["beta"])
    if "censoring_gamma" in d:
        d["censoring_gamma"] = tuple(d["censoring_gamma"])
    return GenerativeConfig(**d)


def coverage_report_to_csv(report: CoverageReport, seed: int) -> str:
    cfg = generative_config_to_dict(report.config)
    cfg["alpha"] = report.alpha
    cfg["n_bootstrap"] = report.n_bootstrap
    cfg["censoring_kind"] = report.censoring_kind
    header = (
        "method,n_reps_used,n_failed,coverage,length_mean,length_sd,"
        "coverage_min_eta,length_min_eta_mean,length_min_eta_sd"
    )
    lines = [_comment_header(seed, cfg) + header]
    for r in report.rows:
        lines.append(
            ",".join(
                [
                    r.method,
                    str(r.n_reps_used),
                    str(r.n_failed),
                    fmt17(r.coverage),
                    fmt17(r.length_mean),
                    fmt17(r.length_sd),
                    fmt17(r.coverage_min_eta),
                    fmt17(r.length_min_eta_mean),
                    fmt17(r.length_min_eta_sd),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def coverage_report_to_json(report: CoverageReport, seed: int) -> str:
    payload = {
        "seed": seed,
        "alpha": report.alpha,
        "n_bootstrap": report.n_bootstrap,
        "censoring_kind": report.censoring_kind,
        "config": generative_config_to_dict(report.config),
        "rows": [asdict(r) for r in report.rows],
    }
    return json.dumps(payload, indent=1) + "\n"


def length_samples_to_csv(report: CoverageReport, seed: int) -> str:
    """Per-replicate mean interval lengths, long format, for external plotting."""
    cfg = generative_config_to_dict(report.config)
    lines = [_comment_header(seed, cfg) + "method,replicate,length,length_min_eta"]
    for method, lengths in report.length_samples.items():
        lengths_min = report.length_min_eta_samples[method]
        for i, (a, b) in enumerate(zip(lengths, lengths_min)):
            lines.append(f"{method},{i},{fmt17(a)},{fmt17(b)}")
    return "\n".join(lines) + "\n"
