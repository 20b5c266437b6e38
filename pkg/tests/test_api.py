import pytest
from fastapi.testclient import TestClient

from app.main import app

Z = {"name": "z", "g": "a", "group": {"family": "abelian", "rank": 1}, "truncation": {"R": 4}}


@pytest.fixture
def client():
    with TestClient(app) as client:
        yield client


def test_health(client):
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json() == {"status": "ok"}


def test_audit_endpoint(client):
    response = client.post("/api/scenarios/audit", json=Z)
    assert response.status_code == 200
    body = response.json()
    assert body["axiom1"]["verdict"] == "PASS"
    assert body["virtually_cyclic"] is True


def test_verify_unknown_suite(client):
    response = client.post("/api/scenarios/verify/nope", json=Z)
    assert response.status_code == 404


def test_verify_axiom_suite(client):
    response = client.post("/api/scenarios/verify/axiom1", json=Z)
    assert response.status_code == 200
    assert response.json()["suite"] == "axiom1"


def test_bad_generator_is_unprocessable(client):
    response = client.post("/api/scenarios/audit", json={**Z, "g": "q"})
    assert response.status_code == 422
