"""HTTP JSON service exposing trained models for interval prediction.

Endpoints (all under /v1):

* ``POST /v1/models`` - multipart upload of a training CSV plus a JSON
  config; fits and calibrates, persists the record as one JSON file per
  model in the data directory, returns 201 with the model id. Ids are
  content hashes, so re-uploading identical inputs is idempotent.
* ``POST /v1/models/{id}/predict`` - intervals for a covariate profile and
  optional what-if scenarios (covariate overrides). A positive ``c_L``
  switches to remaining-lifetime intervals, recalibrated conditionally on a
  stream derived from the stored seed; responses are pure functions of
  (record, request).
* ``GET /v1/models`` and ``GET /v1/models/{id}`` - summaries without raw
  training rows.

Errors use {"code", "message", "detail"} bodies: 400 for ingest/validation
problems, 404 unknown id, 409 insufficient support for a large ``c_L``,
422 when fitting diverges.
"""

from __future__ import annotations

import json
import math
import threading
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
from fastapi import FastAPI, File, Form, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .conformal import calibrate_remaining, config_with_alpha, predict_intervals
from .errors import (
    ConfsurvError,
    FitDiverged,
    IngestError,
    InsufficientSupport,
    InvalidInput,
    SingularDesign,
)
from .rng import RandomStream
from .serialize import (
    ModelRecord,
    conformal_config_from_dict,
    model_record_from_dict,
    model_record_to_dict,
)
from .cli import REMAINING_LIFETIME_STREAM, build_model_record, ingest_csv_text


class Scenario(BaseModel):
    name: str | None = None
    overrides: dict[str, float] = Field(default_factory=dict)


class PredictRequest(BaseModel):
    covariates: dict[str, float]
    alpha: float | None = None
    c_L: float = 0.0
    scenarios: list[Scenario] = Field(default_factory=list)


class ModelStore:
    """One JSON file per model; creation serializes on a lock, reads are free."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._write_lock = threading.Lock()

    def _path(self, model_id: str) -> Path:
        if not model_id.isalnum():
            raise InvalidInput("malformed model id")
        return self.directory / f"{model_id}.json"

    def save(self, record: ModelRecord) -> None:
        with self._write_lock:
            path = self._path(record.model_id)
            tmp = path.with_suffix(".tmp")
            tmp.write_text(json.dumps(model_record_to_dict(record), indent=1) + "\n")
            tmp.replace(path)

    def load(self, model_id: str) -> ModelRecord | None:
        path = self._path(model_id)
        if not path.exists():
            return None
        return model_record_from_dict(json.loads(path.read_text()))

    def list_ids(self) -> list[str]:
        return sorted(p.stem for p in self.directory.glob("*.json"))


def _error_response(status: int, code: str, message: str, detail: dict | None = None) -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content={"code": code, "message": message, "detail": detail or {}},
    )


_STATUS_BY_ERROR = [
    (IngestError, 400),
    (InsufficientSupport, 409),
    (FitDiverged, 422),
    (SingularDesign, 422),
    (InvalidInput, 400),
    (ConfsurvError, 400),
]


def _status_for(exc: ConfsurvError) -> int:
    for klass, status in _STATUS_BY_ERROR:
        if isinstance(exc, klass):
            return status
    return 400


def _interval_payload(interval, scenario_name: str | None, covariates: dict[str, float]) -> dict:
    return {
        "scenario": scenario_name,
        "covariates": covariates,
        "lower": interval.lower,
        "upper": None if math.isinf(interval.upper) else interval.upper,
        "capped": interval.capped,
        "alpha": interval.alpha,
        "c_L": interval.conditioning_time,
    }


def create_app(data_dir: str | Path) -> FastAPI:
    app = FastAPI(title="confsurv", version="0.1.0")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    store = ModelStore(data_dir)

    @app.exception_handler(ConfsurvError)
    async def handle_domain_error(_, exc: ConfsurvError):
        detail = {"row": exc.row} if isinstance(exc, IngestError) else {}
        return _error_response(_status_for(exc), exc.code, str(exc), detail)

    @app.post("/v1/models", status_code=201)
    async def create_model(data: UploadFile = File(...), config: str = Form("{}")):
        try:
            raw_cfg = json.loads(config)
        except json.JSONDecodeError as exc:
            return _error_response(400, "InvalidInput", f"config is not valid JSON: {exc}")
        if not isinstance(raw_cfg, dict):
            return _error_response(400, "InvalidInput", "config must be a JSON object")
        seed = int(raw_cfg.pop("seed", 0))
        cfg = conformal_config_from_dict(raw_cfg)
        text = (await data.read()).decode("utf-8")
        dataset = ingest_csv_text(text)
        record = build_model_record(
            dataset, cfg, seed, created_at=datetime.now(timezone.utc).isoformat()
        )
        store.save(record)
        return JSONResponse(status_code=201, content={"id": record.model_id})

    @app.get("/v1/models")
    async def list_models():
        summaries = []
        for model_id in store.list_ids():
            record = store.load(model_id)
            if record is not None:
                summaries.append(record.summary())
        return summaries

    @app.get("/v1/models/{model_id}")
    async def get_model(model_id: str):
        record = store.load(model_id)
        if record is None:
            return _error_response(404, "NotFound", f"no model with id {model_id!r}")
        return record.summary()

    @app.post("/v1/models/{model_id}/predict")
    async def predict(model_id: str, request: PredictRequest):
        record = store.load(model_id)
        if record is None:
            return _error_response(404, "NotFound", f"no model with id {model_id!r}")
        names = record.covariate_names
        if set(request.covariates) != set(names):
            return _error_response(
                400,
                "InvalidInput",
                "covariate names must match the model exactly",
                {"expected": list(names), "received": sorted(request.covariates)},
            )
        if request.c_L < 0:
            return _error_response(400, "InvalidInput", "c_L must be nonnegative")
        profiles: list[tuple[str | None, dict[str, float]]] = [(None, dict(request.covariates))]
        for i, scenario in enumerate(request.scenarios):
            unknown = set(scenario.overrides) - set(names)
            if unknown:
                return _error_response(
                    400,
                    "InvalidInput",
                    "scenario overrides reference unknown covariates",
                    {"unknown": sorted(unknown)},
                )
            merged = dict(request.covariates)
            merged.update(scenario.overrides)
            profiles.append((scenario.name or f"scenario-{i + 1}", merged))

        x = np.asarray([[profile[name] for name in names] for _, profile in profiles])
        cfg = config_with_alpha(record.config, request.alpha)
        if request.c_L > 0:
            cal = calibrate_remaining(
                record.training_data,
                request.c_L,
                cfg,
                RandomStream(record.seed, REMAINING_LIFETIME_STREAM),
            )
        else:
            cal = record.calibration
        intervals = predict_intervals(cal, x, cfg)
        return {
            "model_id": record.model_id,
            "alpha": cfg.alpha,
            "c_L": request.c_L,
            "intervals": [
                _interval_payload(iv, name, profile)
                for iv, (name, profile) in zip(intervals, profiles)
            ],
        }

    return app
