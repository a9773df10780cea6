import pytest
from fastapi.testclient import TestClient

from llmlimits.service.app import app


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


def test_health(client):
    assert client.get("/health").json() == {"status": "ok"}


def test_list_models(client):
    names = [m["name"] for m in client.get("/models").json()]
    assert names == ["deepseekv3", "llama3-405b", "llama3-70b"]


def test_list_chips(client):
    chips = {c["name"]: c for c in client.get("/chips").json()}
    assert chips["xpu-hbm4"]["mem_bw_tbs"] == 18


def test_throughput_endpoint(client):
    r = client.post("/throughput", json={
        "model": "llama3-405b", "chip": "xpu-hbm3", "tp": 128,
        "batch": 1, "context": 4096,
    })
    assert r.status_code == 200
    body = r.json()
    assert body["throughput"]["utps"] == pytest.approx(776, rel=0.15)
    assert body["throughput"]["bottleneck"] == "memory"
    assert body["breakdown"]["t_batch"] > 0
    assert body["pp"] == 1


def test_throughput_unknown_model_400(client):
    r = client.post("/throughput", json={"model": "gpt-1"})
    assert r.status_code == 400
    assert "valid names" in r.json()["detail"]


def test_throughput_infeasible_422(client):
    r = client.post("/throughput", json={
        "model": "llama3-405b", "chip": "xpu-sram", "tp": 8, "pp": 1,
        "batch": 1, "context": 4096,
    })
    assert r.status_code == 422
    assert "fit" in r.json()["detail"] or "GiB" in r.json()["detail"]


def test_throughput_with_custom_model_config(client):
    cfg = {"models": [{
        "name": "tiny-dense", "num_layers": 4, "embed_dim": 256, "heads": 8,
        "kv_heads": 2, "head_dim": 32, "ffn_dim": 1024, "nominal_params": 5e7,
    }]}
    r = client.post("/throughput", json={
        "model": "tiny-dense", "chip": "xpu-hbm3", "tp": 1,
        "batch": 1, "context": 1024, "config": cfg,
    })
    assert r.status_code == 200
    assert r.json()["throughput"]["utps"] > 1000


def test_capacity_endpoint(client):
    r = client.post("/capacity", json={
        "model": "llama3-405b", "batches": [32], "contexts": [65536, 131072],
    })
    cells = r.json()["cells"]
    assert [c["capacity_gib"] for c in cells] == [881, 1385]


def test_imbalance_endpoint_deterministic(client):
    payload = {"routed_experts": 256, "active_experts": 8, "tokens": 64,
               "trials": 2000, "seed": 5}
    a = client.post("/imbalance", json=payload).json()
    b = client.post("/imbalance", json=payload).json()
    assert a["mi"] == b["mi"]
    assert a["mi"] > 3


def test_imbalance_domain_error(client):
    r = client.post("/imbalance", json={"routed_experts": 4, "active_experts": 8,
                                        "tokens": 4, "trials": 10})
    assert r.status_code == 400


def test_sweep_endpoint(client):
    r = client.post("/sweep", json={"spec": {
        "models": ["llama3-70b"], "chips": ["xpu-hbm3"],
        "tps": [8, 32], "contexts": [4096], "batches": "one",
    }})
    rows = r.json()["rows"]
    assert len(rows) == 2
    assert rows[0]["utps"] < rows[1]["utps"]
    assert rows[0]["infeasible"] is None


def test_sweep_reports_infeasible_rows(client):
    r = client.post("/sweep", json={"spec": {
        "models": ["llama3-405b"], "chips": ["xpu-sram"],
        "tps": [1], "contexts": [1048576],
    }})
    rows = r.json()["rows"]
    assert rows[0]["utps"] is None
    assert rows[0]["infeasible"]


def test_tables_endpoint(client):
    r = client.get("/tables/t6", params={"mi_trials": 2000})
    body = r.json()
    assert body["which"] == "t6"
    assert len(body["rows"]) == 48
    r2 = client.get("/tables/t9")
    assert r2.status_code == 400


def test_validate_config_endpoint(client):
    r = client.post("/validate-config", json={
        "chips": [{"name": "c", "mem_bw_tbs": 1, "tensor_pflops": 1,
                   "scalar_pflops": 1, "mem_capacity_bytes": 1e9}],
    })
    body = r.json()
    assert body["valid"] and body["chips"] == ["c"]


def test_validate_config_rejects_unknown_key(client):
    r = client.post("/validate-config", json={"chipz": []})
    assert r.status_code == 422  # pydantic rejects unknown top-level keys
