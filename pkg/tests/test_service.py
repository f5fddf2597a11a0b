import json

import pytest
from fastapi.testclient import TestClient

from airsched.model import write_instance
from airsched.service.app import app
from airsched.service.client import ServiceClient, ServiceError
from airsched.service import schemas


@pytest.fixture(scope="module")
def http():
    return TestClient(app)


def toy_doc(toy):
    return json.loads(write_instance(toy))


class TestEndpoints:
    def test_health(self, http):
        response = http.get("/health")
        assert response.status_code == 200
        assert response.json() == {"status": "ok"}

    def test_generate_is_deterministic(self, http):
        body = {"m": 6, "n": 3, "T": 8, "d": 1,
                "capacity_range": [1, 2], "route_length_range": [2, 3],
                "seed": 11}
        a = http.post("/instances/generate", json=body)
        b = http.post("/instances/generate", json=body)
        assert a.status_code == 200
        assert a.json() == b.json()
        payload = schemas.InstancePayload.model_validate(a.json()["instance"])
        assert payload.to_instance().n == 3

    def test_generate_rejects_bad_params(self, http):
        body = {"m": 6, "n": 0, "T": 8, "d": 1}
        response = http.post("/instances/generate", json=body)
        assert response.status_code == 400
        assert "n >= 1" in response.json()["detail"]

    def test_solve_accepts_instance_file_schema(self, http, toy):
        # an instance document can be posted verbatim as the payload
        response = http.post("/solve", json={"instance": toy_doc(toy), "mode": "sdp"})
        assert response.status_code == 200
        body = response.json()
        assert body["record"]["status"] == "OPTIMAL"
        assert abs(body["record"]["sdp_bound"] - 1.0) < 1e-4
        assert len(body["x"]) == 4

    def test_solve_exact(self, http, toy):
        response = http.post("/solve", json={"instance": toy_doc(toy), "mode": "exact"})
        body = response.json()
        assert body["record"]["oracle"] == 1
        assert body["schedule"] == [0, 1]

    def test_solve_round_certifies(self, http, toy):
        response = http.post("/solve", json={
            "instance": toy_doc(toy),
            "mode": "sdp+round",
            "settings": {"perturb": 1e-3, "perturb_seed": 7, "seed": 1},
        })
        body = response.json()
        assert body["record"]["best_rounded"] == 1
        assert body["certified"] is True
        assert body["rounding"]["feasible_count"] > 0

    def test_unknown_payload_field_rejected(self, http, toy):
        doc = toy_doc(toy)
        doc["surprise"] = 1
        response = http.post("/solve", json={"instance": doc, "mode": "sdp"})
        assert response.status_code == 422

    def test_semantic_errors_are_400(self, http, toy):
        doc = toy_doc(toy)
        doc["capacities"] = [1, 1]  # wrong length for m=4
        response = http.post("/solve", json={"instance": doc, "mode": "sdp"})
        assert response.status_code == 400
        assert "capacities" in response.json()["detail"]

    def test_budget_exceeded_is_a_status(self, http, toy):
        response = http.post("/solve", json={
            "instance": toy_doc(toy), "mode": "exact",
            "settings": {"budget": 2},
        })
        assert response.status_code == 200
        assert response.json()["record"]["status"] == "BUDGET_EXCEEDED"

    def test_round_histogram(self, http, toy):
        response = http.post("/round", json={"instance": toy_doc(toy)})
        body = response.json()
        assert body["histogram_csv"].startswith("delay,count\n")
        assert body["record"]["status"] == "OPTIMAL"
        assert body["certified"] is True  # bound 1.0 met by a delay-1 sample

    def test_round_survives_infeasible_instances(self, http, toy):
        doc = toy_doc(toy)
        doc["capacities"] = [0, 0, 0, 0]
        response = http.post("/round", json={"instance": doc})
        assert response.status_code == 200
        body = response.json()
        assert body["record"]["status"] != "OPTIMAL"
        assert body["rounding"] is None
        assert body["certified"] is False
        assert body["histogram_csv"] == "delay,count\n"

    def test_bench_grid(self, http):
        response = http.post("/bench", json={
            "n_values": [2, 3], "seeds": [1],
            "modes": ["exact", "sdp", "sdp+round"],
            "m": 5, "T": 6, "d": 1,
            "capacity_range": [1, 2], "route_length_range": [1, 3],
        })
        body = response.json()
        assert len(body["records"]) == 6
        lines = body["csv"].strip().split("\n")
        assert lines[0] == "m,n,T,d,seed,mode,wall_s,sdp_bound,oracle,best_rounded,status"
        assert len(lines) == 7
        rounded = [r for r in body["records"] if r["mode"] == "sdp+round"]
        assert any(r["best_rounded"] is not None for r in rounded)

    def test_bench_empty_grid_rejected(self, http):
        response = http.post("/bench", json={
            "n_values": [], "seeds": [1], "modes": ["sdp"],
        })
        assert response.status_code == 400


class TestServiceClient:
    def test_local_and_http_agree(self, toy):
        request = schemas.SolveRequest(
            instance=schemas.InstancePayload.from_instance(toy), mode="sdp",
        )
        local = ServiceClient().solve(request)
        remote = ServiceClient(http_client=TestClient(app)).solve(request)
        assert local.record.status == remote.record.status == "OPTIMAL"
        assert abs(local.record.sdp_bound - remote.record.sdp_bound) < 1e-12

    def test_local_errors_carry_status(self, toy):
        bad = schemas.GenerateRequest(m=5, n=0, T=5, d=1)
        with pytest.raises(ServiceError) as err:
            ServiceClient().generate(bad)
        assert err.value.status_code == 400
