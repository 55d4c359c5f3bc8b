"""Command-line front door.

Subcommands: ``fit`` (train and persist a model), ``predict`` (intervals for
a covariate CSV), ``simulate`` (coverage studies), ``validate`` (split
validation), ``serve`` (HTTP service). Values in a ``--config`` JSON file are
overridden by explicit flags. Errors exit nonzero with a machine-readable
JSON object on stderr. Artifacts embed the seed and configuration, and are
byte-identical across runs with the same inputs and seed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from .conformal import (
    ConformalConfig,
    calibrate,
    calibrate_remaining,
    config_with_alpha,
    predict_intervals,
)
from .data import Dataset
from .errors import ConfsurvError, IngestError
from .rng import RandomStream
from .serialize import (
    ModelRecord,
    conformal_config_to_dict,
    coverage_report_to_csv,
    coverage_report_to_json,
    generative_config_from_dict,
    intervals_to_csv,
    length_samples_to_csv,
    model_id_for,
    read_model_record,
    write_model_record,
)
from .simulation import METHODS, GenerativeConfig, run_study

REMAINING_LIFETIME_STREAM = 1


def ingest_csv_text(text: str) -> Dataset:
    """Dataset from CSV text with required ``time`` and ``event`` columns.

    An optional ``site`` column carries integer labels; every remaining
    column is a covariate, in header order. Malformed cells raise
    :class:`IngestError` with the 1-based data row number.
    """
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise IngestError("empty file", row=0) from None
    header = [h.strip() for h in header]
    for required in ("time", "event"):
        if required not in header:
            raise IngestError(f"missing required column {required!r}", row=0)
    time_idx = header.index("time")
    event_idx = header.index("event")
    site_idx = header.index("site") if "site" in header else None
    cov_idx = [j for j in range(len(header)) if j not in (time_idx, event_idx, site_idx)]
    names = [header[j] for j in cov_idx]

    times: list[float] = []
    events: list[bool] = []
    sites: list[int] = []
    rows: list[list[float]] = []
    for rownum, cells in enumerate(reader, start=1):
        if not cells or (len(cells) == 1 and not cells[0].strip()):
            continue
        if len(cells) != len(header):
            raise IngestError(f"expected {len(header)} cells, found {len(cells)}", row=rownum)

        def parse(j: int, what: str) -> float:
            try:
                value = float(cells[j])
            except ValueError:
                raise IngestError(f"non-numeric {what} {cells[j]!r}", row=rownum) from None
            if not np.isfinite(value):
                raise IngestError(f"non-finite {what} {cells[j]!r}", row=rownum)
            return value

        t = parse(time_idx, "time")
        if t <= 0:
            raise IngestError(f"time must be positive, found {t!r}", row=rownum)
        e = parse(event_idx, "event")
        if e not in (0.0, 1.0):
            raise IngestError(f"event must be 0 or 1, found {cells[event_idx]!r}", row=rownum)
        if site_idx is not None:
            s = parse(site_idx, "site")
            if s != int(s):
                raise IngestError(f"site must be an integer, found {cells[site_idx]!r}", row=rownum)
            sites.append(int(s))
        times.append(t)
        events.append(bool(e))
        rows.append([parse(j, f"covariate {header[j]!r}") for j in cov_idx])

    if not times:
        raise IngestError("no data rows", row=0)
    return Dataset(
        times=times,
        events=events,
        covariates=np.asarray(rows) if names else np.empty((len(times), 0)),
        sites=sites if site_idx is not None else None,
        covariate_names=names,
    )


def ingest_csv(path: str | Path) -> Dataset:
    return ingest_csv_text(Path(path).read_text(encoding="utf-8"))


def read_covariate_csv(path: str | Path, names: tuple[str, ...]) -> np.ndarray:
    """Covariate matrix from a CSV whose header must cover the model's names."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise IngestError("empty file", row=0)
        missing = [n for n in names if n not in reader.fieldnames]
        if missing:
            raise IngestError(f"missing covariate columns {missing}", row=0)
        rows = []
        for rownum, rec in enumerate(reader, start=1):
            try:
                rows.append([float(rec[n]) for n in names])
            except (TypeError, ValueError):
                raise IngestError("non-numeric covariate cell", row=rownum) from None
    if not rows:
        raise IngestError("no data rows", row=0)
    return np.asarray(rows)


def build_model_record(data: Dataset, cfg: ConformalConfig, seed: int, created_at: str | None = None) -> ModelRecord:
    """Fit, calibrate and assemble a persistable record (stream 0 of the seed)."""
    cal = calibrate(data, cfg, RandomStream(seed, 0))
    return ModelRecord(
        model_id=model_id_for(data, cfg, seed),
        created_at=created_at,
        seed=seed,
        config=cfg,
        calibration=cal,
        training_data=data,
    )


def predict_with_record(record: ModelRecord, x: np.ndarray, alpha: float | None, conditioning_time: float):
    """Intervals from a stored record; positive conditioning times recalibrate
    conditionally on a stream derived from the record's seed, so responses are
    pure functions of (record, request)."""
    cfg = config_with_alpha(record.config, alpha)
    if conditioning_time > 0:
        cal = calibrate_remaining(
            record.training_data,
            conditioning_time,
            cfg,
            RandomStream(record.seed, REMAINING_LIFETIME_STREAM),
        )
    else:
        cal = record.calibration
    return predict_intervals(cal, x, cfg)


# ---------------------------------------------------------------------------
# Argument handling
# ---------------------------------------------------------------------------


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    obj = json.loads(Path(path).read_text())
    if not isinstance(obj, dict):
        raise IngestError("config file must hold a JSON object", row=0)
    return obj


def _merged(file_cfg: dict, args: argparse.Namespace, keys: dict[str, str]) -> dict:
    """File values first, explicit flags override (flags default to None)."""
    out = dict(file_cfg)
    for attr, key in keys.items():
        value = getattr(args, attr, None)
        if value is not None:
            out[key] = value
    return out


_CONFORMAL_KEYS = {
    "alpha": "alpha",
    "B": "n_bootstrap",
    "working_model": "working_model",
    "censoring": "censoring_kind",
    "truncate_at_eta": "truncate_at_eta",
    "one_sided": "sidedness",
    "refit_per_replicate": "refit_per_replicate",
}


def _conformal_config(file_cfg: dict, args: argparse.Namespace) -> ConformalConfig:
    merged = _merged(file_cfg, args, {k: v for k, v in _CONFORMAL_KEYS.items() if k != "one_sided"})
    if getattr(args, "one_sided", None):
        merged["sidedness"] = "lower_only"
    merged.pop("seed", None)
    return ConformalConfig(**merged)


def _seed_of(file_cfg: dict, args: argparse.Namespace) -> int:
    if getattr(args, "seed", None) is not None:
        return int(args.seed)
    return int(file_cfg.get("seed", 0))


def _add_conformal_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=float, default=None, help="miscoverage level (default 0.10)")
    p.add_argument("--B", type=int, default=None, help="bootstrap score replicates (default 2000)")
    p.add_argument(
        "--working-model",
        dest="working_model",
        choices=["cox", "weibull", "lognormal"],
        default=None,
        help="working regression model (default cox)",
    )
    p.add_argument(
        "--censoring",
        choices=["marginal", "stratified", "regression"],
        default=None,
        help="censoring model for the weights (default marginal)",
    )
    p.add_argument(
        "--truncate-at-eta",
        dest="truncate_at_eta",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="truncate upper endpoints at the largest observed failure time",
    )
    p.add_argument(
        "--one-sided",
        dest="one_sided",
        action="store_true",
        default=None,
        help="lower bound only (upper endpoint unbounded)",
    )
    p.add_argument(
        "--refit-per-replicate",
        dest="refit_per_replicate",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="refit the working model on a fresh bootstrap resample per score",
    )
    p.add_argument("--seed", type=int, default=None, help="random seed (default 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="confsurv",
        description="Bootstrap conformal predictive intervals for right-censored survival data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit and calibrate a model from a CSV, write a model file")
    p_fit.add_argument("--input", required=True, help="training CSV (time,event[,site],covariates...)")
    p_fit.add_argument("--out", required=True, help="output model JSON path")
    p_fit.add_argument("--config", default=None, help="JSON config file (flags override)")
    _add_conformal_flags(p_fit)

    p_pred = sub.add_parser("predict", help="predict intervals for covariate rows")
    p_pred.add_argument("--model", required=True, help="model JSON from `confsurv fit`")
    p_pred.add_argument("--input", required=True, help="covariate CSV (header must match the model)")
    p_pred.add_argument("--out", required=True, help="output CSV (lower,upper,capped,alpha)")
    p_pred.add_argument("--alpha", type=float, default=None, help="override the trained alpha")
    p_pred.add_argument("--c-l", dest="c_l", type=float, default=0.0,
                        help="elapsed survival time to condition on (remaining lifetime)")

    p_sim = sub.add_parser("simulate", help="run a coverage study and write report artifacts")
    p_sim.add_argument("--config", default=None, help="JSON config file with generative settings")
    p_sim.add_argument("--out", required=True, help="output directory for report.csv/report.json/lengths.csv")
    p_sim.add_argument("--reps", type=int, default=None, help="study replications")
    p_sim.add_argument("--seed", type=int, default=None, help="random seed (default 0)")
    p_sim.add_argument("--alpha", type=float, default=None, help="miscoverage level (default 0.10)")
    p_sim.add_argument("--B", type=int, default=None, help="bootstrap score replicates (default 2000)")
    p_sim.add_argument("--censoring", choices=["marginal", "stratified", "regression"], default=None,
                       help="censoring model used by the conformal methods")
    p_sim.add_argument("--methods", nargs="+", choices=list(METHODS), default=None,
                       help="interval methods to evaluate")

    p_val = sub.add_parser("validate", help="split-conformal validation of empirical coverage")
    p_val.add_argument("--input", required=True, help="training CSV")
    p_val.add_argument("--out", required=True, help="output JSON summary path")
    p_val.add_argument("--config", default=None, help="JSON config file (flags override)")
    p_val.add_argument("--splits", type=int, default=None, help="number of random splits (default 100)")
    p_val.add_argument("--split-fraction", dest="split_fraction", type=float, default=None,
                       help="training-fold fraction (default 0.7)")
    _add_conformal_flags(p_val)

    p_srv = sub.add_parser("serve", help="start the HTTP prediction service")
    p_srv.add_argument("--port", type=int, default=8000)
    p_srv.add_argument("--host", default="127.0.0.1")
    p_srv.add_argument("--data-dir", dest="data_dir", required=True, help="model storage directory")
    return parser


# ---------------------------------------------------------------------------
# Command handlers
# ---------------------------------------------------------------------------


def _cmd_fit(args: argparse.Namespace) -> int:
    file_cfg = _load_config_file(args.config)
    cfg = _conformal_config(file_cfg, args)
    seed = _seed_of(file_cfg, args)
    data = ingest_csv(args.input)
    record = build_model_record(data, cfg, seed)
    write_model_record(record, args.out)
    print(f"model {record.model_id} written to {args.out}")
    return 0


def _cmd_predict(args: argparse.Namespace) -> int:
    record = read_model_record(args.model)
    x = read_covariate_csv(args.input, record.covariate_names)
    intervals = predict_with_record(record, x, args.alpha, args.c_l)
    cfg_dict = conformal_config_to_dict(config_with_alpha(record.config, args.alpha))
    cfg_dict["c_l"] = args.c_l
    cfg_dict["model_id"] = record.model_id
    Path(args.out).write_text(intervals_to_csv(intervals, record.seed, cfg_dict))
    print(f"{len(intervals)} intervals written to {args.out}")
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    file_cfg = _load_config_file(args.config)
    alpha = args.alpha if args.alpha is not None else float(file_cfg.pop("alpha", 0.10))
    n_bootstrap = args.B if args.B is not None else int(file_cfg.pop("n_bootstrap", 2000))
    censoring_kind = args.censoring if args.censoring is not None else file_cfg.pop("censoring_kind", "marginal")
    methods = args.methods if args.methods is not None else file_cfg.pop(
        "methods", ["cpi-cox", "cpi-weibull", "cpi-lognormal"]
    )
    if args.reps is not None:
        file_cfg["n_reps"] = args.reps
    if args.seed is not None:
        file_cfg["seed"] = args.seed
    gen_cfg = generative_config_from_dict(file_cfg)
    report = run_study(
        gen_cfg, methods, alpha, RandomStream(gen_cfg.seed, 0),
        n_bootstrap=n_bootstrap, censoring_kind=censoring_kind,
    )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.csv").write_text(coverage_report_to_csv(report, gen_cfg.seed))
    (out_dir / "report.json").write_text(coverage_report_to_json(report, gen_cfg.seed))
    (out_dir / "lengths.csv").write_text(length_samples_to_csv(report, gen_cfg.seed))
    print(f"study artifacts written to {out_dir}")
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    from .conformal import split_validate

    file_cfg = _load_config_file(args.config)
    n_splits = args.splits if args.splits is not None else int(file_cfg.pop("splits", 100))
    fraction = args.split_fraction if args.split_fraction is not None else float(
        file_cfg.pop("split_fraction", 0.7)
    )
    cfg = _conformal_config(file_cfg, args)
    seed = _seed_of(file_cfg, args)
    data = ingest_csv(args.input)
    result = split_validate(data, cfg, n_splits, fraction, RandomStream(seed, 0))
    payload = {
        "seed": seed,
        "config": conformal_config_to_dict(cfg),
        "n_splits": result.n_splits,
        "split_fraction": result.split_fraction,
        "mean_coverage": result.mean_coverage,
        "sd_coverage": result.sd_coverage,
        "coverages": result.coverages.tolist(),
        "n_test_uncensored": result.n_test_uncensored.tolist(),
    }
    Path(args.out).write_text(json.dumps(payload, indent=1) + "\n")
    print(f"mean coverage {result.mean_coverage:.4f} (sd {result.sd_coverage:.4f}) -> {args.out}")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(args.data_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


_HANDLERS = {
    "fit": _cmd_fit,
    "predict": _cmd_predict,
    "simulate": _cmd_simulate,
    "validate": _cmd_validate,
    "serve": _cmd_serve,
}


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except ConfsurvError as exc:
        payload = {"code": exc.code, "message": str(exc)}
        if isinstance(exc, IngestError):
            payload["row"] = exc.row
        print(json.dumps(payload), file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
