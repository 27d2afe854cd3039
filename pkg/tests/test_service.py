import numpy as np
import pytest
from fastapi.testclient import TestClient

from blendsolve.service.app import app

client = TestClient(app)

QUICK_RUN = """
[problem]
preset = test1

[grid]
n_cells = 200
n_steps = 500

[blend]
lambda = 1.0
mu = 1.0
"""

QUICK_SWEEP = QUICK_RUN + """
[sweep]
lambda_values = 0.5,1.0
mu_values = 1.0
"""

QUICK_ESTIMATE = QUICK_RUN + """
[richardson]
s = 0.25
coarse_step = 0.5
refine_rounds = 0
"""


class TestEndpoints:
    def test_health(self):
        reply = client.get("/health")
        assert reply.status_code == 200
        assert reply.json() == {"status": "ok"}

    def test_run_returns_files_and_summary(self):
        reply = client.post("/run", json={"config_text": QUICK_RUN})
        assert reply.status_code == 200
        body = reply.json()
        assert set(body["files"]) == {"series.csv", "fields.csv", "effective_config.ini"}
        assert body["summary"]["steps"] == 500
        assert body["summary"]["e1_w"] is not None
        series = body["files"]["series.csv"]
        header = [l for l in series.splitlines() if not l.startswith("#")][0]
        assert header == "step,time,mass_W,mass_V,max_W"
        # resolved-config echo rides along as comments
        assert any(l.startswith("# problem.preset = test1") for l in series.splitlines())

    def test_fields_csv_exact_column_blank_without_exact(self):
        text = """
[problem]
kind = advection
velocity = constant:1.0
initial = box:0.2,0.5
exact = none
speed_bound = 1.0

[grid]
x_lo = 0
x_hi = 2
n_cells = 50
final_time = 0.5
n_steps = 50

[schemes]
s1 = UPW
s2 = UPW
"""
        reply = client.post("/run", json={"config_text": text})
        assert reply.status_code == 200
        body = reply.json()
        assert body["summary"]["e1_w"] is None
        data_line = [l for l in body["files"]["fields.csv"].splitlines()
                     if not l.startswith("#")][1]
        assert data_line.endswith(",")          # empty U_exact field

    def test_run_rejects_bad_config_with_line(self):
        bad = "[problem]\npreset = test1\n\n[blend]\nlambda = 2.0\n"
        reply = client.post("/run", json={"config_text": bad})
        assert reply.status_code == 400
        detail = reply.json()["detail"]
        assert detail["error"] == "config"
        assert detail["line"] == 5

    def test_sweep(self):
        reply = client.post("/sweep", json={"config_text": QUICK_SWEEP})
        assert reply.status_code == 200
        body = reply.json()
        assert body["n_points"] == 2
        assert "sweep.csv" in body["files"]
        assert body["min_e1_w"] <= body["e1_ref"]

    def test_sweep_needs_exact_solution(self):
        text = QUICK_SWEEP.replace("preset = test1", "preset = test1") + ""
        no_exact = """
[problem]
kind = advection
velocity = constant:1.0
initial = box:0.2,0.5
exact = none
speed_bound = 1.0

[grid]
x_lo = 0
x_hi = 2
n_cells = 50
final_time = 0.5
n_steps = 50

[schemes]
s1 = UPW
s2 = UPW
"""
        reply = client.post("/sweep", json={"config_text": no_exact})
        assert reply.status_code == 400
        assert reply.json()["detail"]["error"] == "invalid"

    def test_estimate(self):
        reply = client.post("/estimate", json={"config_text": QUICK_ESTIMATE})
        assert reply.status_code == 200
        body = reply.json()
        assert 0.0 <= body["lambda_r"] <= 1.0
        surface = body["files"]["surface.csv"]
        assert surface.splitlines()[0] == "lambda,mu,delta_R_W,delta_R_V"

    def test_estimate_rejects_large_scale(self):
        reply = client.post("/estimate",
                            json={"config_text": QUICK_RUN + "\n[richardson]\ns = 0.6\n"})
        assert reply.status_code == 400

    def test_bench_unknown_id(self):
        reply = client.post("/bench", json={"test_id": "9"})
        assert reply.status_code == 400
        assert "unknown test id" in reply.json()["detail"]["message"]

    def test_bench_single(self):
        reply = client.post("/bench", json={"test_id": "test2-reverse"})
        assert reply.status_code == 200
        body = reply.json()
        assert body["reports"][0]["test_id"] == "test2-reverse"
        assert "report_test2-reverse.csv" in body["files"]
        assert any(line.startswith("[info]") for line in body["lines"])

    def test_bench_all_enumerates_every_report(self, monkeypatch):
        # keep runtime sane: restrict "all" to the two cheap fixtures
        from blendsolve.service import ops
        monkeypatch.setattr(ops, "ALL_TEST_IDS", ("test2-reverse", "test2-localized"))
        reply = client.post("/bench", json={"test_id": "all"})
        assert reply.status_code == 200
        body = reply.json()
        assert [r["test_id"] for r in body["reports"]] == ["test2-reverse", "test2-localized"]
        assert set(body["files"]) == {"report_test2-reverse.csv", "report_test2-localized.csv"}

    @pytest.mark.filterwarnings("ignore:overflow", "ignore:invalid value")
    def test_diverged_run_maps_to_400(self):
        text = """
[problem]
kind = advection
velocity = constant:1.0
initial = box:0.2,0.4,1e300
speed_bound = 1.0

[grid]
x_lo = 0
x_hi = 1
n_cells = 51
final_time = 10.0
n_steps = 100

[schemes]
s1 = LW
s2 = UPW
"""
        with np.errstate(over="ignore", invalid="ignore"):
            reply = client.post("/run", json={"config_text": text})
        assert reply.status_code == 400
        detail = reply.json()["detail"]
        assert detail["error"] == "diverged"
        assert detail["step"] > 0
