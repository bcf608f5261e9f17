from __future__ import annotations

import json

import pytest
from fastapi.testclient import TestClient

from tfct.export import build_selection_geometry, canonical_json_bytes
from tfct.service import Session, create_app

from conftest import PEAK_STEPS, PERIODIC_STEPS


@pytest.fixture()
def client(periodic_precomputed):
    return TestClient(create_app(Session(periodic_precomputed)))


def _error_code(resp):
    body = resp.json()
    assert set(body) == {"code", "message"}
    return body["code"]


def test_dataset_metadata(client, periodic_precomputed):
    resp = client.get("/api/dataset")
    assert resp.status_code == 200
    body = resp.json()
    assert body["steps"] == PERIODIC_STEPS
    assert body["width"] == periodic_precomputed.width
    assert body["height"] == periodic_precomputed.height
    assert body["labels"] == periodic_precomputed.labels
    lo, hi = periodic_precomputed.alignment.value_range
    assert body["value_range"] == [lo, hi]
    sel = body["selection"]
    assert sel["mode"] == "window"
    assert sel["params"] == {"center": 11, "width": 5}
    assert sel["members"] == [9, 10, 11, 12, 13]


def test_no_dataset_is_404():
    bare = TestClient(create_app(None))
    for resp in (
        bare.get("/api/dataset"),
        bare.get("/api/selection"),
        bare.post("/api/selection", json={"mode": "window", "params": {}}),
        bare.get("/api/selector"),
        bare.get("/api/highlight/tree/0"),
        bare.get("/api/highlight/branch/0"),
    ):
        assert resp.status_code == 404
        assert _error_code(resp) == "no_dataset"


def test_selection_geometry_matches_builder(client, periodic_precomputed):
    body = {"mode": "window", "params": {"center": 11, "width": 5}}
    resp = client.post("/api/selection", json=body)
    assert resp.status_code == 200
    selection = {
        "mode": "window",
        "params": {"center": 11, "width": 5},
        "members": [9, 10, 11, 12, 13],
    }
    want = build_selection_geometry(
        periodic_precomputed.alignment, periodic_precomputed.layout, selection
    )
    assert resp.content == canonical_json_bytes(want)


def test_get_returns_post_bytes_verbatim(client):
    body = {"mode": "multi", "params": {"steps": [0, 6, 12]}}
    posted = client.post("/api/selection", json=body)
    assert posted.status_code == 200
    first = client.get("/api/selection")
    second = client.get("/api/selection")
    assert first.content == posted.content
    assert second.content == posted.content


def test_window_selection_clamps_at_edges(client):
    resp = client.post("/api/selection", json={"mode": "window", "params": {"center": 0, "width": 5}})
    assert json.loads(resp.content)["selection"]["members"] == [0, 1, 2]
    resp = client.post(
        "/api/selection", json={"mode": "window", "params": {"center": 23, "width": 5}}
    )
    assert json.loads(resp.content)["selection"]["members"] == [21, 22, 23]


def test_multi_selection_sorts_and_dedups(client):
    resp = client.post("/api/selection", json={"mode": "multi", "params": {"steps": [9, 3, 3, 5]}})
    assert resp.status_code == 200
    assert json.loads(resp.content)["selection"]["members"] == [3, 5, 9]


def test_periodic_selection(client):
    resp = client.post(
        "/api/selection", json={"mode": "periodic", "params": {"anchor": 0, "period": 12}}
    )
    assert json.loads(resp.content)["selection"]["members"] == [0, 12]


def test_selection_validation_errors(client):
    cases = [
        {"mode": "spiral", "params": {}},
        {"mode": "window", "params": {"center": 11}},
        {"mode": "window", "params": {"center": 11, "width": 0}},
        {"mode": "window", "params": {"center": 40, "width": 5}},
        {"mode": "window", "params": {"center": True, "width": 5}},
        {"mode": "multi", "params": {"steps": []}},
        {"mode": "multi", "params": {"steps": "0,1"}},
        {"mode": "multi", "params": {"steps": [0, "x"]}},
        {"mode": "multi", "params": {"steps": [0, 99]}},
        {"mode": "periodic", "params": {"anchor": 0, "period": 0}},
        {"mode": "periodic", "params": {"anchor": 12, "period": 12}},
        {"mode": "window", "params": []},
    ]
    for body in cases:
        resp = client.post("/api/selection", json=body)
        assert resp.status_code == 422, body
        assert _error_code(resp) == "invalid_selection"
    before = client.get("/api/dataset").json()["selection"]
    assert before["members"] == [9, 10, 11, 12, 13]


def test_shift_window_matches_fresh_selection(client, periodic_precomputed):
    shifted = client.post("/api/selection/shift", json={"direction": 1})
    assert shifted.status_code == 200
    echo = json.loads(shifted.content)["selection"]
    assert echo["params"] == {"center": 12, "width": 5}
    assert echo["members"] == [10, 11, 12, 13, 14]
    fresh = TestClient(create_app(Session(periodic_precomputed)))
    same = fresh.post("/api/selection", json={"mode": "window", "params": {"center": 12, "width": 5}})
    assert shifted.content == same.content


def test_shift_periodic_wraps_anchor(client):
    client.post("/api/selection", json={"mode": "periodic", "params": {"anchor": 0, "period": 12}})
    resp = client.post("/api/selection/shift", json={"direction": 1})
    echo = json.loads(resp.content)["selection"]
    assert echo["params"] == {"anchor": 1, "period": 12}
    assert echo["members"] == [1, 13]


def test_shift_out_of_range_leaves_selection_unchanged(client):
    client.post("/api/selection", json={"mode": "periodic", "params": {"anchor": 11, "period": 12}})
    resp = client.post("/api/selection/shift", json={"direction": 1})
    assert resp.status_code == 409
    assert _error_code(resp) == "out_of_range"
    sel = client.get("/api/dataset").json()["selection"]
    assert sel["params"] == {"anchor": 11, "period": 12}
    assert sel["members"] == [11, 23]


def test_shift_validation(client):
    for direction in (0, 2, True, "left", None):
        resp = client.post("/api/selection/shift", json={"direction": direction})
        assert resp.status_code == 422
        assert _error_code(resp) == "invalid_shift"


def test_selector_endpoint(client):
    resp = client.get("/api/selector", params={"measure": "degree", "mode": "diff", "window": 3})
    assert resp.status_code == 200
    body = resp.json()
    assert body["measure"] == "degree"
    assert body["mode"] == "diff"
    assert body["window"] == 3
    assert len(body["values"]) == PERIODIC_STEPS
    assert len(body["raw"]) == PERIODIC_STEPS
    assert all(0.0 <= v <= 1.0 for v in body["values"])
    again = client.get("/api/selector", params={"measure": "degree", "mode": "diff", "window": 3})
    assert again.content == resp.content


def test_selector_validation(client):
    for params in (
        {"measure": "pagerank"},
        {"mode": "integral"},
        {"window": 0},
    ):
        resp = client.get("/api/selector", params=params)
        assert resp.status_code == 422
        assert _error_code(resp) == "invalid_selector"
    resp = client.get("/api/selector", params={"window": "three"})
    assert resp.status_code == 422
    assert _error_code(resp) == "invalid_request"


def test_highlight_tree_inside_selection(client):
    resp = client.get("/api/highlight/tree/10")
    assert resp.status_code == 200
    body = resp.json()
    assert body["kind"] == "full"
    assert body["t"] == 10
    geometry = json.loads(client.get("/api/selection").content)
    want = next(m for m in geometry["members"] if m["t"] == 10)
    assert body["member"] == want


def test_highlight_tree_outside_selection(client, periodic_precomputed):
    resp = client.get("/api/highlight/tree/0")
    assert resp.status_code == 200
    body = resp.json()
    assert body["kind"] == "branches"
    assert body["t"] == 0
    want = [
        key
        for key in sorted(periodic_precomputed.layout.branches)
        if 0 in periodic_precomputed.alignment.nodes[key].members
    ]
    assert body["branches"] == want
    assert client.get("/api/highlight/tree/24").status_code == 404
    assert client.get("/api/highlight/tree/-1").status_code == 404


def test_highlight_branch_reports_presence(client):
    resp = client.get("/api/highlight/branch/501")
    assert resp.status_code == 200
    body = resp.json()
    assert body["branch"] == 501
    assert body["present_at"] == sorted(PEAK_STEPS)
    missing = client.get("/api/highlight/branch/999999")
    assert missing.status_code == 404
    assert _error_code(missing) == "unknown_branch"


def test_node_identity_stable_across_selections(client):
    a = json.loads(
        client.post(
            "/api/selection", json={"mode": "multi", "params": {"steps": [0, 1, 2]}}
        ).content
    )
    b = json.loads(
        client.post(
            "/api/selection", json={"mode": "multi", "params": {"steps": [0, 13]}}
        ).content
    )
    colors_a = {n["id"]: (n["color_key"], n["color"]) for n in a["nodes"]}
    colors_b = {n["id"]: (n["color_key"], n["color"]) for n in b["nodes"]}
    shared = set(colors_a) & set(colors_b)
    assert shared
    for nid in shared:
        assert colors_a[nid][0] == colors_b[nid][0]
        if colors_a[nid][1] is not None and colors_b[nid][1] is not None:
            assert colors_a[nid][1] == colors_b[nid][1]


def test_selection_flags_round_trip(client):
    body = {
        "mode": "multi",
        "params": {"steps": [0, 6, 12]},
        "compact_gaps": True,
        "equal_spacing": True,
    }
    resp = client.post("/api/selection", json=body)
    echo = json.loads(resp.content)["selection"]
    assert echo["compact_gaps"] is True
    assert echo["equal_spacing"] is True
    follow = client.post("/api/selection", json={"mode": "multi", "params": {"steps": [0, 6]}})
    assert json.loads(follow.content)["selection"]["compact_gaps"] is True
