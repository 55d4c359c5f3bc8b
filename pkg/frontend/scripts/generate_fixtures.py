"""Regenerate the committed service-response fixtures.

Builds a synthetic treatment-style dataset, uploads it through the real HTTP
interface (in-process ASGI client), and freezes the model summary plus two
prediction responses (unconditional and conditional on 24 elapsed time
units) with four treatment profiles: surgery alone (base), plus chemo, plus
radiation, plus both.

Run from the frontend directory:  python3 scripts/generate_fixtures.py
"""

import json
from pathlib import Path

import numpy as np
from fastapi.testclient import TestClient

from confsurv.service import create_app

OUT = Path(__file__).resolve().parent.parent / "fixtures"
SEED = 2026


def synthetic_treatment_csv(n: int = 900) -> str:
    gen = np.random.Generator(np.random.PCG64(SEED))
    chemo = (gen.random(n) < 0.5).astype(float)
    radiation = (gen.random(n) < 0.5).astype(float)
    age = gen.uniform(3.0, 9.0, n)  # decades
    grade = gen.integers(1, 4, n).astype(float)
    mu = 3.4 + 0.55 * chemo + 0.35 * radiation - 0.12 * age - 0.25 * (grade - 1)
    t = np.exp(mu + 0.55 * gen.standard_normal(n))
    c = gen.uniform(0.0, 150.0, n)
    y = np.minimum(t, c)
    event = (t <= c).astype(int)
    lines = ["time,event,chemo,radiation,age_decades,grade"]
    for row in zip(y, event, chemo, radiation, age, grade):
        lines.append(",".join([repr(float(row[0])), str(int(row[1]))] + [repr(float(v)) for v in row[2:]]))
    return "\n".join(lines) + "\n"


def main() -> None:
    OUT.mkdir(exist_ok=True)
    client = TestClient(create_app(OUT / "_store"))
    config = {"alpha": 0.10, "n_bootstrap": 2000, "working_model": "lognormal", "seed": SEED}
    created = client.post(
        "/v1/models",
        files={"data": ("treatment.csv", synthetic_treatment_csv().encode(), "text/csv")},
        data={"config": json.dumps(config)},
    )
    created.raise_for_status()
    model_id = created.json()["id"]

    summary = client.get(f"/v1/models/{model_id}").json()
    (OUT / "model.json").write_text(json.dumps(summary, indent=1) + "\n")

    base = {"chemo": 0.0, "radiation": 0.0, "age_decades": 5.5, "grade": 3.0}
    scenarios = [
        {"name": "surgery + chemo", "overrides": {"chemo": 1.0}},
        {"name": "surgery + radiation", "overrides": {"radiation": 1.0}},
        {"name": "trimodality", "overrides": {"chemo": 1.0, "radiation": 1.0}},
    ]
    for fname, c_l in (("predict.json", 0.0), ("predict_conditional.json", 24.0)):
        response = client.post(
            f"/v1/models/{model_id}/predict",
            json={"covariates": base, "c_L": c_l, "scenarios": scenarios},
        )
        response.raise_for_status()
        (OUT / fname).write_text(json.dumps(response.json(), indent=1) + "\n")
    print(f"fixtures written to {OUT}")


if __name__ == "__main__":
    main()
