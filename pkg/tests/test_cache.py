from __future__ import annotations

import dataclasses
import hashlib
import struct
from pathlib import Path

import pytest

from tfct.cache import (
    PrecomputedSession,
    TFCA_MAGIC,
    dataset_digest,
    default_cache_dir,
    load_session,
    save_session,
)
from tfct.dataset_io import DataError
from tfct.export import build_selection_geometry, canonical_json_bytes


def _saved(tmp_path, session, name="session.tfca"):
    path = tmp_path / name
    save_session(session, path)
    return path


def test_round_trip_preserves_session(tmp_path, periodic_precomputed):
    pre = periodic_precomputed
    loaded = load_session(_saved(tmp_path, pre))

    assert loaded.labels == pre.labels
    assert (loaded.width, loaded.height) == (pre.width, pre.height)
    assert loaded.dataset_sha == pre.dataset_sha
    assert loaded.metric == pre.metric
    assert loaded.seed_step == pre.seed_step
    assert loaded.layout_seed == pre.layout_seed

    a, b = pre.alignment, loaded.alignment
    assert b.parent == a.parent
    assert b.root_id == a.root_id
    assert b.aligned_steps == a.aligned_steps
    assert b.value_range == a.value_range
    assert set(b.nodes) == set(a.nodes)
    for nid, node in a.nodes.items():
        copy = b.nodes[nid]
        assert copy.value == node.value
        assert copy.frequency == node.frequency
        assert copy.color_key == node.color_key
        assert set(copy.members) == set(node.members)
        for t, ref in node.members.items():
            got = copy.members[t]
            assert (got.node_id, got.vertex, got.value, got.kind) == (
                ref.node_id,
                ref.vertex,
                ref.value,
                ref.kind,
            )
            assert got.attrs is None
        assert copy.attrs is None


def test_round_trip_preserves_layout_placement(tmp_path, periodic_precomputed):
    pre = periodic_precomputed
    loaded = load_session(_saved(tmp_path, pre))
    lay, got = pre.layout, loaded.layout
    assert set(got.branches) == set(lay.branches)
    for key, b in lay.branches.items():
        c = got.branches[key]
        for field in (
            "key_node",
            "anchor_node",
            "parent_key",
            "attachment",
            "x",
            "side",
            "order_key",
            "members",
            "y_low",
            "y_high",
        ):
            assert getattr(c, field) == getattr(b, field), field
    assert got.node_branch == lay.node_branch
    assert got.node_x == lay.node_x
    assert got.node_y == lay.node_y
    assert got.order == lay.order
    assert got.main_key == lay.main_key
    assert got.value_range == lay.value_range
    assert got.seed == pre.layout_seed


def test_loaded_session_reproduces_geometry_bytes(tmp_path, periodic_precomputed):
    pre = periodic_precomputed
    loaded = load_session(_saved(tmp_path, pre))
    for members in ([0, 1, 2, 3, 4], [0, 12], [5, 6, 7]):
        selection = {"mode": "multi", "params": {"steps": members}, "members": members}
        want = build_selection_geometry(pre.alignment, pre.layout, selection)
        got = build_selection_geometry(loaded.alignment, loaded.layout, selection)
        assert canonical_json_bytes(got) == canonical_json_bytes(want)


def test_save_creates_parent_directories(tmp_path, static_precomputed):
    path = tmp_path / "deep" / "nested" / "s.tfca"
    save_session(static_precomputed, path)
    assert path.is_file()
    assert path.read_bytes().startswith(TFCA_MAGIC)


def test_save_rejects_bad_digest(tmp_path, static_precomputed):
    broken = dataclasses.replace(static_precomputed, dataset_sha=b"short")
    with pytest.raises(DataError):
        save_session(broken, tmp_path / "bad.tfca")


def test_load_rejects_corrupt_files(tmp_path, static_precomputed):
    path = _saved(tmp_path, static_precomputed)
    raw = path.read_bytes()

    bad_magic = tmp_path / "magic.tfca"
    bad_magic.write_bytes(b"NOPE" + raw[4:])
    with pytest.raises(DataError, match="magic"):
        load_session(bad_magic)

    bad_version = tmp_path / "version.tfca"
    patched = bytearray(raw)
    struct.pack_into("<I", patched, 4, 99)
    bad_version.write_bytes(bytes(patched))
    with pytest.raises(DataError, match="version"):
        load_session(bad_version)

    truncated = tmp_path / "trunc.tfca"
    truncated.write_bytes(raw[: len(raw) // 2])
    with pytest.raises(DataError, match="truncated"):
        load_session(truncated)

    trailing = tmp_path / "extra.tfca"
    trailing.write_bytes(raw + b"\x00")
    with pytest.raises(DataError, match="trailing"):
        load_session(trailing)

    with pytest.raises(DataError, match="cannot read"):
        load_session(tmp_path / "missing.tfca")


def test_dataset_digest_is_sha256():
    raw = b"some dataset bytes"
    assert dataset_digest(raw) == hashlib.sha256(raw).digest()
    assert len(dataset_digest(b"")) == 32


def test_default_cache_dir_env_override(monkeypatch):
    monkeypatch.setenv("TFCT_CACHE_DIR", "/tmp/elsewhere")
    assert default_cache_dir() == Path("/tmp/elsewhere")
    monkeypatch.delenv("TFCT_CACHE_DIR")
    assert default_cache_dir() == Path(".tfct-cache")
