import json
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from confsurv.cli import (
    build_model_record,
    ingest_csv,
    ingest_csv_text,
    predict_with_record,
    read_covariate_csv,
    run,
)
from confsurv.conformal import ConformalConfig, predict_intervals
from confsurv.errors import IngestError
from confsurv.kaplan_meier import km_estimate
from confsurv.rng import RandomStream
from confsurv.serialize import read_model_record
from confsurv.simulation import GenerativeConfig, generate, resolve_tau_c


def write_training_csv(path, seed=3, n=250):
    cfg = resolve_tau_c(GenerativeConfig(n_train=n, n_test=8, n_reps=1, seed=seed))
    sim = generate(cfg, RandomStream(seed).substream(0))
    d = sim.train
    lines = ["time,event,x1,x2,x3,x4"]
    for t, e, x in zip(d.times, d.events, d.covariates):
        cells = [repr(float(t)), str(int(e))] + [repr(float(v)) for v in x]
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n")
    new_lines = ["x1,x2,x3,x4"] + [
        ",".join(repr(float(v)) for v in row) for row in sim.test_covariates
    ]
    newx = path.parent / "newx.csv"
    newx.write_text("\n".join(new_lines) + "\n")
    return path, newx


class TestIngest:
    def test_single_row(self, tmp_path):
        f = tmp_path / "d.csv"
        f.write_text("time,event,x1\n1.0,1,0.5\n")
        d = ingest_csv(f)
        assert d.n == 1 and d.covariate_names == ("x1",)
        assert d.times[0] == 1.0 and bool(d.events[0])

    def test_event_out_of_domain_names_row(self):
        with pytest.raises(IngestError) as err:
            ingest_csv_text("time,event,x1\n1.0,2,0.5\n")
        assert err.value.row == 1

    def test_bad_rows_are_numbered(self):
        with pytest.raises(IngestError) as err:
            ingest_csv_text("time,event\n1.0,1\n-3.0,0\n")
        assert err.value.row == 2
        with pytest.raises(IngestError) as err:
            ingest_csv_text("time,event\n1.0,1\nabc,0\n")
        assert err.value.row == 2

    def test_missing_required_column(self):
        with pytest.raises(IngestError) as err:
            ingest_csv_text("time,x1\n1.0,0.5\n")
        assert err.value.row == 0

    def test_site_column_parsed(self):
        d = ingest_csv_text("time,event,site,x1\n1.0,1,2,0.3\n2.0,0,1,0.4\n")
        assert d.sites.tolist() == [2, 1]
        assert d.covariate_names == ("x1",)

    def test_end_to_end_kaplan_meier(self):
        # The three-row fixture through the CSV pipeline reproduces the hand
        # product-limit values.
        d = ingest_csv_text("time,event\n1.0,1\n2.0,0\n3.0,1\n")
        curve = km_estimate(d)
        assert_allclose(curve.value(np.array([1.0, 3.0])), [2 / 3, 0.0])


class TestFitPredictRoundTrip:
    def test_model_file_reproduces_in_memory_intervals(self, tmp_path):
        train_csv, newx_csv = write_training_csv(tmp_path / "train.csv")
        cfg = ConformalConfig(alpha=0.1, n_bootstrap=300, working_model="cox")
        data = ingest_csv(train_csv)
        record = build_model_record(data, cfg, seed=11)
        in_memory = predict_intervals(record.calibration, read_covariate_csv(newx_csv, record.covariate_names))

        model_path = tmp_path / "model.json"
        assert run([
            "fit", "--input", str(train_csv), "--out", str(model_path),
            "--working-model", "cox", "--B", "300", "--seed", "11",
        ]) == 0
        reloaded = read_model_record(model_path)
        from_file = predict_intervals(
            reloaded.calibration, read_covariate_csv(newx_csv, reloaded.covariate_names)
        )
        assert from_file == in_memory  # bit-exact serialization round trip

    def test_fit_artifacts_byte_identical(self, tmp_path):
        train_csv, _ = write_training_csv(tmp_path / "train.csv")
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        args = ["--input", str(train_csv), "--working-model", "weibull", "--B", "200", "--seed", "7"]
        assert run(["fit", "--out", str(a)] + args) == 0
        assert run(["fit", "--out", str(b)] + args) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_predict_csv_and_degenerate_alpha(self, tmp_path):
        train_csv, newx_csv = write_training_csv(tmp_path / "train.csv")
        model_path = tmp_path / "model.json"
        run(["fit", "--input", str(train_csv), "--out", str(model_path),
             "--working-model", "lognormal", "--B", "200", "--seed", "2"])
        out = tmp_path / "iv.csv"
        assert run(["predict", "--model", str(model_path), "--input", str(newx_csv),
                    "--out", str(out), "--alpha", "1.0"]) == 0
        rows = [line for line in out.read_text().splitlines() if not line.startswith("#")]
        assert rows[0] == "lower,upper,capped,alpha"
        for line in rows[1:]:
            lower, upper, capped, alpha = line.split(",")
            assert lower == upper  # alpha = 1 collapses to a point
            assert capped == "0" and float(alpha) == 1.0

    def test_predict_with_conditioning_time(self, tmp_path):
        train_csv, newx_csv = write_training_csv(tmp_path / "train.csv")
        model_path = tmp_path / "model.json"
        run(["fit", "--input", str(train_csv), "--out", str(model_path), "--B", "200", "--seed", "2"])
        out = tmp_path / "iv.csv"
        assert run(["predict", "--model", str(model_path), "--input", str(newx_csv),
                    "--out", str(out), "--c-l", "1.5"]) == 0
        rows = [line for line in out.read_text().splitlines() if not line.startswith("#")][1:]
        assert all(float(line.split(",")[0]) >= 1.5 for line in rows)

    def test_covariate_csv_name_mismatch(self, tmp_path):
        train_csv, _ = write_training_csv(tmp_path / "train.csv")
        model_path = tmp_path / "model.json"
        run(["fit", "--input", str(train_csv), "--out", str(model_path), "--B", "200", "--seed", "2"])
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b\n1,2\n")
        assert run(["predict", "--model", str(model_path), "--input", str(bad),
                    "--out", str(tmp_path / "iv.csv")]) == 1


class TestSimulateCommand:
    def test_artifacts_byte_identical_across_runs(self, tmp_path):
        args = ["simulate", "--reps", "2", "--seed", "5", "--B", "200",
                "--methods", "cpi-cox", "km"]
        cfg = {"n_train": 200, "n_test": 200}
        cfg_path = tmp_path / "sim.json"
        cfg_path.write_text(json.dumps(cfg))
        out1, out2 = tmp_path / "s1", tmp_path / "s2"
        assert run(args + ["--config", str(cfg_path), "--out", str(out1)]) == 0
        assert run(args + ["--config", str(cfg_path), "--out", str(out2)]) == 0
        for name in ("report.csv", "report.json", "lengths.csv"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_report_embeds_seed_and_config(self, tmp_path):
        cfg_path = tmp_path / "sim.json"
        cfg_path.write_text(json.dumps({"n_train": 150, "n_test": 100}))
        out = tmp_path / "sim"
        run(["simulate", "--config", str(cfg_path), "--out", str(out), "--reps", "1",
             "--seed", "9", "--B", "150", "--methods", "km"])
        text = (out / "report.csv").read_text()
        assert text.startswith("# seed: 9\n# config: ")
        payload = json.loads((out / "report.json").read_text())
        assert payload["seed"] == 9 and payload["rows"][0]["method"] == "km"


class TestValidateCommand:
    def test_summary_written(self, tmp_path):
        train_csv, _ = write_training_csv(tmp_path / "train.csv", n=400)
        out = tmp_path / "val.json"
        assert run(["validate", "--input", str(train_csv), "--out", str(out),
                    "--splits", "4", "--B", "200", "--working-model", "weibull",
                    "--seed", "3"]) == 0
        payload = json.loads(out.read_text())
        assert payload["n_splits"] == 4
        assert 0.5 < payload["mean_coverage"] <= 1.0
        assert len(payload["coverages"]) == 4


class TestArgumentHandling:
    def test_unknown_flag_is_an_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            run(["fit", "--input", "x.csv", "--out", "m.json", "--bogus"])
        assert exc.value.code == 2

    def test_flags_override_config_file(self, tmp_path):
        train_csv, _ = write_training_csv(tmp_path / "train.csv")
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({"alpha": 0.2, "n_bootstrap": 150, "seed": 1}))
        model_path = tmp_path / "model.json"
        run(["fit", "--input", str(train_csv), "--out", str(model_path),
             "--config", str(cfg_path), "--alpha", "0.5"])
        record = read_model_record(model_path)
        assert record.config.alpha == 0.5          # flag wins
        assert record.config.n_bootstrap == 150    # file value kept
        assert record.seed == 1

    def test_error_is_machine_readable(self, tmp_path, capsys):
        missing = tmp_path / "nope.csv"
        missing.write_text("time,event\n-1.0,1\n")
        code = run(["fit", "--input", str(missing), "--out", str(tmp_path / "m.json")])
        assert code == 1
        err = json.loads(capsys.readouterr().err)
        assert err["code"] == "IngestError" and err["row"] == 1


def test_help_documents_every_flag(capsys):
    from confsurv.cli import build_parser

    parser = build_parser()
    rendered = []
    for command in ("fit", "predict", "simulate", "validate", "serve"):
        with pytest.raises(SystemExit):
            parser.parse_args([command, "--help"])
        rendered.append(capsys.readouterr().out)
    combined = "\n".join(rendered)
    for flag in ("--input", "--model", "--alpha", "--B", "--working-model", "--censoring",
                 "--truncate-at-eta", "--c-l", "--one-sided", "--seed", "--reps",
                 "--config", "--out", "--port"):
        assert flag in combined
