"""Binary persistence of a precomputed session.

A session bundles the sequence alignment and the annealed overall
layout so serving and exporting never redo the heavy work.  Everything
is little-endian: the TFCA magic, a version, the sha256 of the source
dataset bytes, the alignment parameters, the node/member tables and the
branch placement table.  Member attributes used only during alignment
are deliberately not stored; a loaded session can select, lay out and
analyze, but not extend the alignment.
"""

from __future__ import annotations

import hashlib
import os
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional

from .alignment import AlignmentNode, AlignmentTree, MatchMetric, MemberRef, METRIC_KINDS
from .dataset_io import DataError
from .layout import Layout, LayoutBranch, normalized_y
from .topology import KIND_MAXIMUM, KIND_MINIMUM, KIND_ROOT_DEGENERATE, KIND_SADDLE

TFCA_MAGIC = b"TFCA"
TFCA_VERSION = 1
_NONE = 0xFFFFFFFF
_KINDS = (KIND_MINIMUM, KIND_MAXIMUM, KIND_SADDLE, KIND_ROOT_DEGENERATE)

ENV_CACHE_DIR = "TFCT_CACHE_DIR"


def default_cache_dir() -> Path:
    return Path(os.environ.get(ENV_CACHE_DIR, ".tfct-cache"))


def dataset_digest(raw: bytes) -> bytes:
    return hashlib.sha256(raw).digest()


@dataclass
class PrecomputedSession:
    alignment: AlignmentTree
    layout: Layout
    labels: List[str]
    width: int
    height: int
    dataset_sha: bytes
    metric: MatchMetric
    seed_step: int
    layout_seed: int


class _Writer:
    def __init__(self):
        self.parts: List[bytes] = []

    def pack(self, fmt: str, *vals) -> None:
        self.parts.append(struct.pack("<" + fmt, *vals))

    def raw(self, data: bytes) -> None:
        self.parts.append(data)

    def string(self, s: str) -> None:
        data = s.encode("utf-8")
        self.pack("H", len(data))
        self.raw(data)

    def opt_id(self, v: Optional[int]) -> None:
        self.pack("I", _NONE if v is None else v)

    def getvalue(self) -> bytes:
        return b"".join(self.parts)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def unpack(self, fmt: str):
        fmt = "<" + fmt
        size = struct.calcsize(fmt)
        if self.pos + size > len(self.data):
            raise DataError("cache file truncated")
        vals = struct.unpack_from(fmt, self.data, self.pos)
        self.pos += size
        return vals if len(vals) > 1 else vals[0]

    def raw(self, size: int) -> bytes:
        if self.pos + size > len(self.data):
            raise DataError("cache file truncated")
        out = self.data[self.pos : self.pos + size]
        self.pos += size
        return out

    def string(self) -> str:
        size = self.unpack("H")
        return self.raw(size).decode("utf-8")

    def opt_id(self) -> Optional[int]:
        v = self.unpack("I")
        return None if v == _NONE else v


def save_session(session: PrecomputedSession, path) -> None:
    w = _Writer()
    w.raw(TFCA_MAGIC)
    w.pack("I", TFCA_VERSION)
    if len(session.dataset_sha) != 32:
        raise DataError("dataset digest must be 32 bytes of sha256")
    w.raw(session.dataset_sha)
    w.pack("I", METRIC_KINDS.index(session.metric.kind))
    w.pack("d", session.metric.combined_weight)
    w.pack("I", session.seed_step)
    w.pack("I", session.layout_seed)
    align = session.alignment
    t_count = len(align.aligned_steps)
    w.pack("III", t_count, session.width, session.height)
    w.pack("dd", *align.value_range)
    w.pack("I", len(session.labels))
    for label in session.labels:
        w.string(label)

    w.pack("I", len(align.nodes))
    for nid in sorted(align.nodes):
        node = align.nodes[nid]
        w.pack("I", nid)
        w.opt_id(align.parent[nid])
        w.pack("d", node.value)
        w.pack("I", node.color_key)
        w.pack("I", len(node.members))
        for t in sorted(node.members):
            ref = node.members[t]
            w.pack("IIId", t, ref.node_id, ref.vertex, ref.value)
            w.pack("B", _KINDS.index(ref.kind))
    w.pack("I", align.root_id)

    lay = session.layout
    w.pack("I", len(lay.branches))
    for key in sorted(lay.branches):
        b = lay.branches[key]
        w.pack("I", key)
        w.opt_id(b.parent_key)
        w.pack("I", b.anchor_node)
        w.opt_id(b.attachment)
        w.pack("d", b.x)
        w.pack("b", b.side)
        w.pack("I", b.order_key)
        w.pack("dd", b.y_low, b.y_high)
    w.pack("I", len(lay.node_branch))
    for nid in sorted(lay.node_branch):
        w.pack("II", nid, lay.node_branch[nid])

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(w.getvalue())


def load_session(path) -> PrecomputedSession:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read cache file {path}: {exc}") from exc
    r = _Reader(data)
    if r.raw(4) != TFCA_MAGIC:
        raise DataError(f"{path} is not a session cache (bad magic)")
    version = r.unpack("I")
    if version != TFCA_VERSION:
        raise DataError(f"unsupported cache version {version}")
    sha = r.raw(32)
    metric = MatchMetric(METRIC_KINDS[r.unpack("I")], r.unpack("d"))
    seed_step = r.unpack("I")
    layout_seed = r.unpack("I")
    t_count, width, height = r.unpack("III")
    vmin, vmax = r.unpack("dd")
    labels = [r.string() for _ in range(r.unpack("I"))]
    if len(labels) != t_count:
        raise DataError("cache label count does not match step count")

    nodes: Dict[int, AlignmentNode] = {}
    parent: Dict[int, Optional[int]] = {}
    for _ in range(r.unpack("I")):
        nid = r.unpack("I")
        parent[nid] = r.opt_id()
        value = r.unpack("d")
        color_key = r.unpack("I")
        members: Dict[int, MemberRef] = {}
        for _ in range(r.unpack("I")):
            t, member_id, vertex, mvalue = r.unpack("IIId")
            kind = _KINDS[r.unpack("B")]
            members[t] = MemberRef(member_id, vertex, mvalue, kind, None)
        nodes[nid] = AlignmentNode(
            id=nid,
            value=value,
            frequency=len(members),
            color_key=color_key,
            members=members,
            attrs=None,
        )
    root_id = r.unpack("I")
    alignment = AlignmentTree(
        nodes=nodes,
        parent=parent,
        root_id=root_id,
        aligned_steps=list(range(t_count)),
        value_range=(vmin, vmax),
        next_id=max(nodes) + 1,
    )

    branches: Dict[int, LayoutBranch] = {}
    n_branches = r.unpack("I")
    main_key = root_id
    for _ in range(n_branches):
        key = r.unpack("I")
        parent_key = r.opt_id()
        anchor = r.unpack("I")
        attachment = r.opt_id()
        x = r.unpack("d")
        side = r.unpack("b")
        order_key = r.unpack("I")
        y_low, y_high = r.unpack("dd")
        members_t = tuple(sorted(nodes[key].members)) if key in nodes else ()
        branches[key] = LayoutBranch(
            key_node=key,
            anchor_node=anchor,
            parent_key=parent_key,
            attachment=attachment,
            node_path=[],
            owned_nodes=[],
            side=side,
            x=x,
            order_key=order_key,
            members=members_t,
            y_low=y_low,
            y_high=y_high,
        )
        if parent_key is None:
            main_key = key
    node_branch: Dict[int, int] = {}
    for _ in range(r.unpack("I")):
        nid, key = r.unpack("II")
        node_branch[nid] = key
    if r.pos != len(data):
        raise DataError(f"{len(data) - r.pos} trailing bytes in cache file")

    node_x = {nid: branches[node_branch[nid]].x for nid in nodes}
    node_y = {nid: normalized_y(nodes[nid].value, (vmin, vmax)) for nid in nodes}
    order = sorted(branches, key=lambda k: (branches[k].x, k))
    layout = Layout(
        branches=branches,
        node_branch=node_branch,
        node_x=node_x,
        node_y=node_y,
        order=order,
        main_key=main_key,
        cost=0.0,
        initial_cost=0.0,
        overlap=0.0,
        value_range=(vmin, vmax),
        seed=layout_seed,
    )
    return PrecomputedSession(
        alignment=alignment,
        layout=layout,
        labels=labels,
        width=width,
        height=height,
        dataset_sha=sha,
        metric=metric,
        seed_step=seed_step,
        layout_seed=layout_seed,
    )
