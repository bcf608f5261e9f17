"""Branch-based layout of alignment trees.

Branches of the alignment get integer slots left and right of their
parent branch (unit spacing, main branch at x = 0).  Slot assignment is
optimized by simulated annealing against the overlap of bounding boxes
of branches that share a time step, plus a small drift term that pulls
everything towards the center, followed by a deterministic greedy
repair pass.  Sub-alignments inherit their positions from the overall
layout (`trickle_down`); single time steps project onto the sub layout
(`transfer_to_member`); `bundle` produces the fuzzy drawing with one
curve per alignment arc and frequency-based opacity.
"""

from __future__ import annotations

import math
import random
import zlib
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Tuple

from .alignment import AlignmentTree
from .dataset_io import DataError
from .topology import _cancel_leaves

BOX_HALF_WIDTH = 0.4
SLOT_UNIT = 1.0
DRIFT_WEIGHT = 0.01
ANNEAL_SWEEPS = 200
COOLING = 0.95

PALETTE = (
    "#1f77b4",
    "#ff7f0e",
    "#2ca02c",
    "#d62728",
    "#9467bd",
    "#8c564b",
    "#e377c2",
    "#7f7f7f",
    "#bcbd22",
    "#17becf",
)


def color_for_key(color_key: int) -> str:
    """Stable palette color for an alignment color key."""
    return PALETTE[zlib.crc32(str(color_key).encode("ascii")) % len(PALETTE)]


def overlap_area(a: Tuple[float, float, float, float], b: Tuple[float, float, float, float]) -> float:
    """Intersection area of two (xmin, ymin, xmax, ymax) boxes.

    Two unit squares shifted by half a unit horizontally overlap in 0.5.
    """
    w = min(a[2], b[2]) - max(a[0], b[0])
    h = min(a[3], b[3]) - max(a[1], b[1])
    if w <= 0.0 or h <= 0.0:
        return 0.0
    return w * h


@dataclass
class LayoutBranch:
    key_node: int
    anchor_node: int
    parent_key: Optional[int]
    attachment: Optional[int]
    node_path: List[int]
    owned_nodes: List[int]
    side: int
    x: float
    order_key: int
    members: Tuple[int, ...]
    y_low: float
    y_high: float

    def bbox(self) -> Tuple[float, float, float, float]:
        return (self.x - BOX_HALF_WIDTH, self.y_low, self.x + BOX_HALF_WIDTH, self.y_high)


@dataclass
class Layout:
    branches: Dict[int, LayoutBranch]
    node_branch: Dict[int, int]
    node_x: Dict[int, float]
    node_y: Dict[int, float]
    order: List[int]
    main_key: int
    cost: float
    initial_cost: float
    overlap: float
    value_range: Tuple[float, float]
    seed: Optional[int] = None


def normalized_y(value: float, value_range: Tuple[float, float]) -> float:
    lo, hi = value_range
    if hi == lo:
        return 0.5
    return (value - lo) / (hi - lo)


# ---------------------------------------------------------------------------
# branch extraction on alignment trees
# ---------------------------------------------------------------------------


def _alignment_branches(alignment: AlignmentTree):
    """Leaf-cancellation branch decomposition of an alignment tree.

    Returns (branches by key node, node ownership, main key).  The main
    branch spans the value extremes and is keyed by the root; every
    other branch is keyed by its extremum leaf.
    """
    root = alignment.root_id
    gmin = alignment.global_min_node()
    if root == gmin:
        raise DataError("alignment collapsed to a single node, cannot lay out")
    records, main_path = _cancel_leaves(
        alignment.nodes.keys(), alignment.adjacency(), alignment.node_key, {root, gmin}
    )

    def member_steps(nid: int) -> Tuple[int, ...]:
        sel = set(alignment.selected_steps)
        return tuple(sorted(t for t in alignment.nodes[nid].members if t in sel))

    def span(path: List[int]) -> Tuple[float, float]:
        vals = [alignment.nodes[n].value for n in path]
        rng = alignment.value_range
        return (
            normalized_y(min(vals), rng),
            normalized_y(max(vals), rng),
        )

    branches: Dict[int, LayoutBranch] = {}
    anchor = main_path[0] if main_path[-1] == root else main_path[-1]
    low, high = span(main_path)
    branches[root] = LayoutBranch(
        key_node=root,
        anchor_node=anchor,
        parent_key=None,
        attachment=None,
        node_path=list(main_path),
        owned_nodes=list(main_path),
        side=0,
        x=0.0,
        order_key=0,
        members=member_steps(root),
        y_low=low,
        y_high=high,
    )
    for rec in records:
        path = rec["path"]
        leaf = path[-1]
        low, high = span(path)
        branches[leaf] = LayoutBranch(
            key_node=leaf,
            anchor_node=leaf,
            parent_key=None,
            attachment=path[0],
            node_path=list(path),
            owned_nodes=list(path[1:]),
            side=0,
            x=0.0,
            order_key=0,
            members=member_steps(leaf),
            y_low=low,
            y_high=high,
        )

    node_branch: Dict[int, int] = {}
    for key in branches:
        for nid in branches[key].owned_nodes:
            node_branch[nid] = key
    for key, branch in branches.items():
        if branch.attachment is not None:
            branch.parent_key = node_branch[branch.attachment]
    return branches, node_branch, root


# ---------------------------------------------------------------------------
# slot optimization
# ---------------------------------------------------------------------------


class _SlotState:
    """Left/right slot lists per parent branch, outward order."""

    def __init__(self, branches: Dict[int, LayoutBranch], main_key: int):
        self.main_key = main_key
        self.slots: Dict[int, Tuple[List[int], List[int]]] = {k: ([], []) for k in branches}
        for key in sorted(branches):
            parent = branches[key].parent_key
            if parent is None:
                continue
            left, right = self.slots[parent]
            if len(right) <= len(left):
                right.append(key)
            else:
                left.append(key)

    def copy(self) -> "_SlotState":
        dup = object.__new__(_SlotState)
        dup.main_key = self.main_key
        dup.slots = {k: (list(l), list(r)) for k, (l, r) in self.slots.items()}
        return dup

    def positions(self) -> Tuple[Dict[int, float], Dict[int, int]]:
        x = {self.main_key: 0.0}
        side: Dict[int, int] = {self.main_key: 0}
        stack = [self.main_key]
        while stack:
            parent = stack.pop()
            left, right = self.slots[parent]
            for i, child in enumerate(right):
                x[child] = x[parent] + (i + 1) * SLOT_UNIT
                side[child] = 1
                stack.append(child)
            for i, child in enumerate(left):
                x[child] = x[parent] - (i + 1) * SLOT_UNIT
                side[child] = -1
                stack.append(child)
        return x, side

    def all_moves(self) -> List[tuple]:
        moves: List[tuple] = []
        for parent in sorted(self.slots):
            left, right = self.slots[parent]
            places = [("L", i) for i in range(len(left))] + [("R", i) for i in range(len(right))]
            for i in range(len(places)):
                for j in range(i + 1, len(places)):
                    moves.append(("swap", parent, places[i], places[j]))
        for parent in sorted(self.slots):
            left, right = self.slots[parent]
            for i in range(len(left)):
                moves.append(("mirror", parent, ("L", i)))
            for i in range(len(right)):
                moves.append(("mirror", parent, ("R", i)))
        return moves

    def apply(self, move: tuple) -> None:
        if move[0] == "swap":
            _, parent, p1, p2 = move
            left, right = self.slots[parent]
            l1 = left if p1[0] == "L" else right
            l2 = left if p2[0] == "L" else right
            l1[p1[1]], l2[p2[1]] = l2[p2[1]], l1[p1[1]]
        else:
            _, parent, place = move
            left, right = self.slots[parent]
            src, dst = (left, right) if place[0] == "L" else (right, left)
            child = src.pop(place[1])
            dst.insert(min(place[1], len(dst)), child)


def _overlap_and_drift(branches: Dict[int, LayoutBranch], x: Dict[int, float]) -> Tuple[float, float]:
    keys = sorted(branches)
    boxes = {}
    for k in keys:
        b = branches[k]
        boxes[k] = (x[k] - BOX_HALF_WIDTH, b.y_low, x[k] + BOX_HALF_WIDTH, b.y_high)
    total = 0.0
    for i, ka in enumerate(keys):
        ma = set(branches[ka].members)
        for kb in keys[i + 1 :]:
            if ma.isdisjoint(branches[kb].members):
                continue
            total += overlap_area(boxes[ka], boxes[kb])
    drift = sum(abs(v) for v in x.values())
    return total, drift


def _state_cost(branches: Dict[int, LayoutBranch], state: _SlotState) -> Tuple[float, float]:
    x, _ = state.positions()
    overlap, drift = _overlap_and_drift(branches, x)
    return overlap + DRIFT_WEIGHT * drift, overlap


def _finalize(
    alignment: AlignmentTree,
    branches: Dict[int, LayoutBranch],
    node_branch: Dict[int, int],
    main_key: int,
    x: Dict[int, float],
    side: Dict[int, int],
    keep_order_keys: bool = False,
    seed: Optional[int] = None,
    initial_cost: float = 0.0,
) -> Layout:
    for key, branch in branches.items():
        branch.x = x[key]
        branch.side = side[key]
    order = sorted(branches, key=lambda k: (branches[k].x, k))
    if not keep_order_keys:
        for rank, key in enumerate(order):
            branches[key].order_key = rank
    node_x = {nid: branches[node_branch[nid]].x for nid in alignment.nodes}
    node_y = {
        nid: normalized_y(alignment.nodes[nid].value, alignment.value_range)
        for nid in alignment.nodes
    }
    overlap, drift = _overlap_and_drift(branches, {k: b.x for k, b in branches.items()})
    return Layout(
        branches=branches,
        node_branch=node_branch,
        node_x=node_x,
        node_y=node_y,
        order=order,
        main_key=main_key,
        cost=overlap + DRIFT_WEIGHT * drift,
        initial_cost=initial_cost,
        overlap=overlap,
        value_range=alignment.value_range,
        seed=seed,
    )


def compute_layout(alignment: AlignmentTree, seed: int = 42) -> Layout:
    """Slot layout of an alignment, annealed and greedily repaired.

    Deterministic for a fixed seed.  Contemporary branches (sharing a
    time step) end up with disjoint boxes whenever the repair pass can
    reach such a state by single swaps and mirrors.
    """
    branches, node_branch, main_key = _alignment_branches(alignment)
    state = _SlotState(branches, main_key)
    rng = random.Random(seed)

    cur_cost, _ = _state_cost(branches, state)
    initial_cost = cur_cost
    best_state = state.copy()
    best_cost = cur_cost
    moves = state.all_moves()
    if moves:
        temp = cur_cost if cur_cost > 0 else 1.0
        for _ in range(ANNEAL_SWEEPS):
            for _ in range(max(4, len(branches))):
                # mirrors change the slot lists, so the move set depends
                # on the current state
                moves = state.all_moves()
                candidate = state.copy()
                candidate.apply(moves[rng.randrange(len(moves))])
                cand_cost, _ = _state_cost(branches, candidate)
                delta = cand_cost - cur_cost
                if delta <= 0 or rng.random() < math.exp(-delta / max(temp, 1e-12)):
                    state = candidate
                    cur_cost = cand_cost
                    if cur_cost < best_cost:
                        best_cost = cur_cost
                        best_state = state.copy()
            temp *= COOLING

        state = best_state
        # deterministic descent, overlap first, then the full cost
        cur = _state_cost(branches, state)
        while True:
            improved = False
            for move in state.all_moves():
                candidate = state.copy()
                candidate.apply(move)
                cand = _state_cost(branches, candidate)
                less_overlap = cand[1] < cur[1] - 1e-12
                same_overlap = cand[1] < cur[1] + 1e-12
                if less_overlap or (same_overlap and cand[0] < cur[0] - 1e-12):
                    state = candidate
                    cur = cand
                    improved = True
                    break
            if not improved:
                break

    x, side = state.positions()
    return _finalize(
        alignment, branches, node_branch, main_key, x, side,
        seed=seed, initial_cost=initial_cost,
    )


# ---------------------------------------------------------------------------
# sub-alignment placement
# ---------------------------------------------------------------------------


def trickle_down(overall: Layout, sub: AlignmentTree, compact_gaps: bool = False) -> Layout:
    """Position a sub-alignment by inheriting from the overall layout.

    Every sub branch takes the x of the overall branch that owns its
    anchor node, so branches keep their place when the selection
    changes.  With `compact_gaps`, slots on each side re-index to
    consecutive units while preserving order.
    """
    branches, node_branch, main_key = _alignment_branches(sub)
    x: Dict[int, float] = {}
    side: Dict[int, int] = {}
    for key in sorted(branches):
        anchor = branches[key].anchor_node
        host = overall.branches[overall.node_branch[anchor]]
        x[key] = host.x
        side[key] = host.side
        branches[key].order_key = host.order_key
    if compact_gaps:
        lefts = sorted((k for k in branches if x[k] < 0.0), key=lambda k: (-x[k], branches[k].order_key))
        rights = sorted((k for k in branches if x[k] > 0.0), key=lambda k: (x[k], branches[k].order_key))
        for i, k in enumerate(lefts):
            x[k] = -(i + 1) * SLOT_UNIT
        for i, k in enumerate(rights):
            x[k] = (i + 1) * SLOT_UNIT
    return _finalize(sub, branches, node_branch, main_key, x, side, keep_order_keys=True)


def optimized_branch_spacing(layout: Layout) -> Layout:
    """Equalize the horizontal gaps between sibling branches.

    Children of one parent on one side move to offsets i * M / k, where
    M is the largest current offset on that side; a single child stays
    put.  Order keys are left untouched.
    """
    branches = {k: replace(b, node_path=list(b.node_path), owned_nodes=list(b.owned_nodes)) for k, b in layout.branches.items()}
    children: Dict[int, List[int]] = {k: [] for k in branches}
    for key in sorted(branches):
        parent = branches[key].parent_key
        if parent is not None:
            children[parent].append(key)
    new_x: Dict[int, float] = {layout.main_key: branches[layout.main_key].x}
    queue = [layout.main_key]
    while queue:
        parent = queue.pop(0)
        for sign in (-1, 1):
            group = [
                k for k in children[parent]
                if (branches[k].x - layout.branches[parent].x) * sign > 0
            ]
            group.sort(key=lambda k: (abs(branches[k].x - layout.branches[parent].x), branches[k].order_key))
            if not group:
                continue
            biggest = max(abs(branches[k].x - layout.branches[parent].x) for k in group)
            for i, k in enumerate(group, start=1):
                new_x[k] = new_x[parent] + sign * biggest * i / len(group)
        # children exactly at the parent x keep their relative offset of zero
        for k in children[parent]:
            if k not in new_x:
                new_x[k] = new_x[parent]
        queue.extend(children[parent])
    for key, branch in branches.items():
        branch.x = new_x[key]
    node_x = {nid: branches[layout.node_branch[nid]].x for nid in layout.node_x}
    order = sorted(branches, key=lambda k: (branches[k].x, k))
    overlap, drift = _overlap_and_drift(branches, new_x)
    return Layout(
        branches=branches,
        node_branch=dict(layout.node_branch),
        node_x=node_x,
        node_y=dict(layout.node_y),
        order=order,
        main_key=layout.main_key,
        cost=overlap + DRIFT_WEIGHT * drift,
        initial_cost=layout.initial_cost,
        overlap=overlap,
        value_range=layout.value_range,
        seed=layout.seed,
    )


# ---------------------------------------------------------------------------
# single-step projection and fuzzy drawing
# ---------------------------------------------------------------------------


@dataclass
class MemberNodePlacement:
    alignment_id: int
    member_node_id: int
    x: float
    y: float
    value: float
    kind: str


@dataclass
class MemberEdge:
    child: int
    parent: int
    points: List[Tuple[float, float]]


@dataclass
class MemberLayout:
    t: int
    nodes: List[MemberNodePlacement]
    edges: List[MemberEdge]


def transfer_to_member(sub_layout: Layout, sub: AlignmentTree, t: int) -> MemberLayout:
    """Project one selected time step onto the sub-alignment layout.

    Nodes present at t take their alignment x and the normalized member
    value as y.  Edges walk up to the nearest ancestor that is also
    present, routing through the alignment positions of skipped nodes.
    """
    if t not in sub.selected_steps:
        raise DataError(f"step {t} is not part of the selection")
    present = {nid for nid, node in sub.nodes.items() if t in node.members}
    placements: List[MemberNodePlacement] = []
    pos: Dict[int, Tuple[float, float]] = {}
    for nid in sorted(present):
        ref = sub.nodes[nid].members[t]
        x = sub_layout.node_x[nid]
        y = normalized_y(ref.value, sub.value_range)
        pos[nid] = (x, y)
        placements.append(
            MemberNodePlacement(
                alignment_id=nid,
                member_node_id=ref.node_id,
                x=x,
                y=y,
                value=ref.value,
                kind=ref.kind,
            )
        )
    edges: List[MemberEdge] = []
    for nid in sorted(present):
        anc = sub.parent[nid]
        via: List[int] = []
        while anc is not None and anc not in present:
            via.append(anc)
            anc = sub.parent[anc]
        if anc is None:
            continue
        points = [pos[nid]]
        points.extend((sub_layout.node_x[m], sub_layout.node_y[m]) for m in via)
        points.append(pos[anc])
        edges.append(MemberEdge(child=nid, parent=anc, points=points))
    return MemberLayout(t=t, nodes=placements, edges=edges)


@dataclass
class BundledEdge:
    child: int
    parent: int
    frequency: int
    opacity: float
    points: List[Tuple[float, float]]
    members: Tuple[int, ...]


@dataclass
class BundledGeometry:
    selected: List[int]
    edges: List[BundledEdge]
    leaf_colors: Dict[int, str]


def bundle(sub: AlignmentTree, sub_layout: Layout) -> BundledGeometry:
    """Fuzzy rendering data: one quadratic curve per alignment arc.

    Opacity is the fraction of selected steps in which the arc exists
    (both endpoints present).  Curves bend at (x_child, y_parent), so
    siblings merge visually before reaching the parent.  Leaf colors
    hash the color key into a fixed palette.
    """
    selected = list(sub.selected_steps)
    edges: List[BundledEdge] = []
    for nid in sorted(sub.nodes):
        parent = sub.parent[nid]
        if parent is None:
            continue
        both = sorted(sub.nodes[nid].members.keys() & sub.nodes[parent].members.keys())
        cx, cy = sub_layout.node_x[nid], sub_layout.node_y[nid]
        px, py = sub_layout.node_x[parent], sub_layout.node_y[parent]
        edges.append(
            BundledEdge(
                child=nid,
                parent=parent,
                frequency=len(both),
                opacity=len(both) / len(selected),
                points=[(cx, cy), (cx, py), (px, py)],
                members=tuple(both),
            )
        )
    leaf_colors = {
        nid: color_for_key(sub.nodes[nid].color_key) for nid in sub.leaves()
    }
    return BundledGeometry(selected=selected, edges=edges, leaf_colors=leaf_colors)
