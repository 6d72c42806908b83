import pytest
from fastapi.testclient import TestClient

from shiftlab.experiments import ExperimentConfig
from shiftlab.service import app


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


SPEC = {"mu_d": [1.0], "mu_s": [0.5], "sigma_d": 1.0, "sigma_s": 1.0, "eta": 0.5}


def test_health(client):
    body = client.get("/health").json()
    assert body["status"] == "ok"


def test_defaults_round_trips_through_config(client):
    body = client.get("/defaults").json()
    cfg = ExperimentConfig.from_ini(body["config_ini"])
    assert cfg.master_seed == 2024


def test_generate(client):
    resp = client.post("/generate", json={"spec": SPEC, "n": 8, "seed": 1})
    assert resp.status_code == 200
    body = resp.json()
    lines = body["csv"].splitlines()
    assert lines[0] == "y,x_0,x_1,zd_0,zs_0"
    assert len(lines) == 9
    assert "[domain]" in body["spec_config"]
    plain = client.post(
        "/generate", json={"spec": SPEC, "n": 3, "seed": 1, "include_latents": False}
    ).json()
    assert plain["csv"].splitlines()[0] == "y,x_0,x_1"


def test_generate_is_deterministic(client):
    a = client.post("/generate", json={"spec": SPEC, "n": 50, "seed": 9}).json()
    b = client.post("/generate", json={"spec": SPEC, "n": 50, "seed": 9}).json()
    assert a["csv"] == b["csv"]


def test_risk_sweep(client):
    resp = client.post(
        "/risk-sweep",
        json={"spec": SPEC, "w_s": [0.0, 0.5, 1.0], "gammas": [1.0, 4.0], "mc_samples": 0},
    )
    assert resp.status_code == 200
    rows = resp.json()["rows"]
    assert len(rows) == 6
    assert {r["method"] for r in rows} == {"closed_form"}


def test_mc_check(client):
    resp = client.post("/mc-check", json={"points": 3, "samples": 20000, "seed": 2})
    assert resp.status_code == 200
    body = resp.json()
    assert body["points"] == 3
    assert body["n_within_4_sigma"] >= 2


def test_train_endpoint(client):
    resp = client.post(
        "/train",
        json={
            "spec": SPEC,
            "n": 300,
            "seed": 4,
            "schedule": "lp_ft",
            "train": {"lr_lp": 0.3, "lr_ft": 0.05, "lp_iters": 30, "ft_iters": 30},
            "swad": {"r": 0.1, "eval_interval": 5, "n_s": 2},
            "eval_gammas": [1.0, 4.0],
        },
    )
    assert resp.status_code == 200
    body = resp.json()
    assert body["trace_csv"].splitlines()[0] == "iter,phase,train_loss,val_loss,swad_active"
    assert body["checkpoint"].startswith("shiftlab-model 1")
    assert set(body["test_risks"]) == {"1.0", "4.0"}
    assert 0.0 <= body["train_risk"] <= 1.0
    assert body["swad_report"] is not None


def test_experiment_and_grid_select_flow(client):
    cfg = ExperimentConfig.from_ini(ExperimentConfig().to_ini())
    cfg.scenario = "svc"
    cfg.gammas = (1.0, 4.0)
    cfg.schedules = ("lp_only",)
    cfg.pretrains = ("oracle_silent", "oracle_dominant")
    cfg.n_train = 300
    cfg.mc_samples = 0
    cfg.rep_seeds = (0, 1)
    from shiftlab.training import TrainConfig

    cfg.train_grid = (
        TrainConfig(lr_lp=0.5, lr_ft=0.05, lp_iters=60, ft_iters=0),
        TrainConfig(lr_lp=0.05, lr_ft=0.05, lp_iters=60, ft_iters=0),
    )
    resp = client.post("/experiment", json={"config_ini": cfg.to_ini()})
    assert resp.status_code == 200
    body = resp.json()
    assert body["run_meta"]["scenario"] == "svc"
    select = client.post(
        "/grid-select", json={"results_csv": body["results_csv"], "criterion": "train_val"}
    )
    assert select.status_code == 200
    assert select.json()["config_id"] in (0, 1)


def test_demo_fig3_endpoint(client):
    resp = client.post("/demo-fig3", json={"n": 10, "gamma": 4.0, "seed": 3})
    assert resp.status_code == 200
    assert resp.json()["lines_csv"].splitlines()[0] == "arm,coef_dominant,coef_silent,intercept"


def test_package_errors_map_to_400(client):
    resp = client.post("/generate", json={"spec": dict(SPEC, eta=2.0), "n": 5, "seed": 0})
    assert resp.status_code == 400
    body = resp.json()
    assert body["error"] == "ConfigurationError"
    assert "eta" in body["detail"]


def test_validation_errors_map_to_422(client):
    resp = client.post("/generate", json={"spec": {"mu_d": [], "mu_s": [0.5]}, "n": 5})
    assert resp.status_code == 422
    resp = client.post("/generate", json={"spec": SPEC, "n": 0})
    assert resp.status_code == 422
    resp = client.post("/mc-check", json={"points": 1, "samples": 10})
    assert resp.status_code == 422


def test_grid_select_protocol_error_maps_to_400(client):
    resp = client.post("/grid-select", json={"results_csv": "bogus", "criterion": "train_val"})
    assert resp.status_code == 400
    assert resp.json()["error"] == "ProtocolError"
