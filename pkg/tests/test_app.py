import pytest

from app import app

PATH3 = {"edges": [["a", "b"], ["b", "c"]], "attributes": {"a": "-1", "b": "+1", "c": "-1"}}


@pytest.fixture
def client():
    app.config["TESTING"] = True
    with app.test_client() as client:
        yield client


def test_health(client):
    response = client.get("/health")
    assert response.status_code == 200
    body = response.get_json()
    assert body["status"] == "healthy"
    assert body["services"]["orchestrator"] == "available"


def test_measure_path3(client):
    response = client.post("/measure", json={**PATH3, "alpha": 1})
    assert response.status_code == 200
    body = response.get_json()
    assert body["degree_mi"] == pytest.approx(1.0)
    assert body["delta_i"] == pytest.approx(0.0, abs=1e-12)
    assert body["gamma_deg"] == pytest.approx(-1.0)


def test_measure_uses_default_order(client):
    assert client.post("/measure", json=PATH3).get_json()["alpha"] == 1.3


def test_jdam(client):
    response = client.post("/jdam", json={"edges": [["a", "b"]], "attributes": {"a": "m", "b": "f"}})
    assert response.status_code == 200
    body = response.get_json()
    assert body["labels"] == ["0:+1", "0:-1"]
    assert body["matrix"] == [[0, 1], [1, 0]]


def test_isolated_nodes_are_kept(client):
    payload = {"edges": [["a", "b"]], "attributes": {"a": "+1", "b": "-1", "z": "-1"}}
    assert client.post("/measure", json=payload).status_code == 200


@pytest.mark.parametrize(
    "payload",
    [
        {"edges": [["a", "b"]], "attributes": {"a": "+1", "b": "x"}},
        {"edges": [["a", "b"]], "attributes": {"a": "+1"}},
        {"edges": [["a", "a"]], "attributes": {"a": "+1"}},
        {"edges": [["a", "b", 0]], "attributes": {"a": "+1", "b": "-1"}},
        {"edges": "a b", "attributes": {}},
        {**PATH3, "alpha": -1},
        {**PATH3, "alpha": "high"},
    ],
)
def test_bad_input_is_a_client_error(client, payload):
    response = client.post("/measure", json=payload)
    assert response.status_code == 400
    assert response.get_json()["kind"] == "invalid input"


def test_missing_body(client):
    response = client.post("/measure", data="not json", content_type="text/plain")
    assert response.status_code == 400


def test_empty_graph_is_degenerate(client):
    response = client.post("/measure", json={"edges": [], "attributes": {"a": "+1"}})
    assert response.status_code == 400
    assert response.get_json()["kind"] == "degenerate input"


def test_unknown_route(client):
    assert client.get("/nowhere").status_code == 404
