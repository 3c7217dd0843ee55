from fastapi.testclient import TestClient

from api.main import app

client = TestClient(app)


def test_root():
    response = client.get("/")
    assert response.status_code == 200
    assert "running" in response.json()["message"]


def test_scenarios_are_listed():
    response = client.get("/api/scenarios")
    assert response.status_code == 200
    assert "chiral_loop" in response.json()["scenarios"]


def test_verify_returns_a_report():
    response = client.get("/api/verify", params={"scenario": "flat_sheet", "n": 32})
    assert response.status_code == 200
    body = response.json()
    assert body["scenario"] == "flat_sheet"
    assert body["passed"] is True


def test_unknown_scenario_is_404():
    assert client.get("/api/verify", params={"scenario": "nope"}).status_code == 404


def test_grid_limits():
    assert client.get("/api/verify", params={"scenario": "flat_sheet", "n": 4}).status_code == 422
    assert client.get("/api/verify", params={"scenario": "flat_sheet", "n": 4096}).status_code == 422


def test_report_card_is_svg():
    response = client.get(
        "/api/report-card", params={"scenario": "circle", "n": 16, "theme": "Dracula", "bg_color": "101010"}
    )
    assert response.status_code == 200
    assert response.headers["content-type"].startswith("image/svg+xml")
    assert "#101010" in response.text


def test_grid_limit_comes_from_settings(monkeypatch):
    import api.main

    monkeypatch.setattr(api.main, "MAX_API_N", 16)
    response = client.get("/api/verify", params={"scenario": "flat_sheet", "n": 32})
    assert response.status_code == 422
    assert "16" in response.json()["detail"]
