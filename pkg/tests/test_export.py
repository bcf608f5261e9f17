from __future__ import annotations

import json

import pytest

from tfct.export import (
    build_selection_geometry,
    canonical_json_bytes,
    member_geometry,
    svg_document,
)


def _window_selection(members):
    lo = min(members)
    hi = max(members)
    return {
        "mode": "window",
        "params": {"center": (lo + hi) // 2, "width": hi - lo + 1},
        "members": list(members),
    }


@pytest.fixture(scope="module")
def window_payload(periodic_alignment, periodic_layout):
    selection = _window_selection(range(5))
    return build_selection_geometry(periodic_alignment, periodic_layout, selection)


def test_canonical_json_bytes_sorted_and_compact():
    a = {"b": 1, "a": [1.5, 2], "c": {"y": None, "x": "s"}}
    b = {"c": {"x": "s", "y": None}, "a": [1.5, 2], "b": 1}
    raw = canonical_json_bytes(a)
    assert raw == b'{"a":[1.5,2],"b":1,"c":{"x":"s","y":null}}'
    assert canonical_json_bytes(b) == raw


def test_payload_top_level_shape(window_payload, periodic_alignment):
    payload = window_payload
    assert set(payload) == {
        "selection",
        "value_range",
        "branches",
        "nodes",
        "edges",
        "members",
    }
    assert payload["selection"]["members"] == [0, 1, 2, 3, 4]
    assert payload["selection"]["compact_gaps"] is False
    assert payload["selection"]["equal_spacing"] is False
    lo, hi = periodic_alignment.value_range
    assert payload["value_range"] == [lo, hi]


def test_payload_branches_and_nodes_are_consistent(window_payload):
    payload = window_payload
    branch_ids = [b["id"] for b in payload["branches"]]
    assert branch_ids == sorted(branch_ids)
    selected = set(payload["selection"]["members"])
    for b in payload["branches"]:
        assert set(b["present_at"]) <= selected
        assert b["present_at"]
    branch_x = {b["id"]: b["x"] for b in payload["branches"]}
    node_ids = [n["id"] for n in payload["nodes"]]
    assert node_ids == sorted(node_ids)
    for n in payload["nodes"]:
        assert n["branch"] in branch_x
        assert n["x"] == branch_x[n["branch"]]
        assert 0.0 <= n["y"] <= 1.0
        assert n["members"] == sorted(n["members"])
        assert set(n["members"]) <= selected


def test_payload_edges_are_elbows(window_payload):
    payload = window_payload
    assert payload["edges"]
    node_x = {n["id"]: n["x"] for n in payload["nodes"]}
    node_y = {n["id"]: n["y"] for n in payload["nodes"]}
    for e in payload["edges"]:
        (cx, cy), (ex, ey), (px, py) = e["points"]
        assert (cx, cy) == (node_x[e["child"]], node_y[e["child"]])
        assert (px, py) == (node_x[e["parent"]], node_y[e["parent"]])
        assert (ex, ey) == (cx, py)
        assert 0.0 < e["opacity"] <= 1.0


def test_payload_member_layouts(window_payload):
    payload = window_payload
    assert [m["t"] for m in payload["members"]] == [0, 1, 2, 3, 4]
    alignment_x = {n["id"]: n["x"] for n in payload["nodes"]}
    for entry in payload["members"]:
        assert entry["nodes"]
        for p in entry["nodes"]:
            assert p["x"] == alignment_x[p["id"]]
        for e in entry["edges"]:
            assert len(e["points"]) >= 2


def test_member_geometry_lookup(window_payload):
    entry = member_geometry(window_payload, 3)
    assert entry is not None and entry["t"] == 3
    assert member_geometry(window_payload, 17) is None


def test_payload_bytes_are_reproducible(periodic_alignment, periodic_layout):
    selection = _window_selection(range(5))
    first = build_selection_geometry(periodic_alignment, periodic_layout, selection)
    second = build_selection_geometry(periodic_alignment, periodic_layout, selection)
    assert canonical_json_bytes(first) == canonical_json_bytes(second)
    parsed = json.loads(canonical_json_bytes(first))
    assert parsed == json.loads(json.dumps(first))


def test_payload_flags_change_geometry(periodic_alignment, periodic_layout):
    selection = _window_selection(range(5))
    plain = build_selection_geometry(periodic_alignment, periodic_layout, selection)
    compact = build_selection_geometry(
        periodic_alignment, periodic_layout, selection, compact_gaps=True
    )
    assert compact["selection"]["compact_gaps"] is True
    plain_order = [b["id"] for b in plain["branches"]]
    assert plain_order == [b["id"] for b in compact["branches"]]


def test_svg_document_structure(window_payload):
    svg = svg_document(window_payload, width=320, height=200)
    assert svg.startswith('<svg xmlns="http://www.w3.org/2000/svg" width="320" height="200"')
    assert svg.endswith("</svg>\n")
    assert svg.count("<circle") == len(window_payload["nodes"])
    assert svg.count("<path ") == len(window_payload["edges"])


def test_svg_embeds_edge_coordinates_verbatim(window_payload):
    svg = svg_document(window_payload)
    for e in window_payload["edges"]:
        (x0, y0), (cx, cy), (x1, y1) = e["points"]
        needle = f'M {x0!r} {y0!r} Q {cx!r} {cy!r} {x1!r} {y1!r}'
        assert needle in svg
    for entry in window_payload["members"]:
        for e in entry["edges"]:
            pts = " ".join(f"{p[0]!r},{p[1]!r}" for p in e["points"])
            assert f'points="{pts}"' in svg
