"""Alignment of contour tree sequences into one fuzzy supertree.

Trees are folded pairwise into an alignment tree whose nodes carry the
per-step member nodes they stand for.  The pairwise step is a dynamic
program over rooted forests (rooted at the global maximum): two nodes
either match, or one of them is inserted and the other descends.  Costs
come from branch-level node attributes and live in [0, 1]; inserting a
node costs 1, leaving a whole subtree unmatched costs its node count.

Everything here is deterministic: ties prefer matching over insertion,
then keeping the pairing of the previously aligned step, then lower ids.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .dataset_io import DataError
from .topology import ContourTree, NodeAttrs, branch_decomposition, node_attributes

METRIC_KINDS = ("persistence", "volume", "combined", "overlap")


@dataclass(frozen=True)
class MatchMetric:
    kind: str = "persistence"
    combined_weight: float = 0.5

    def __post_init__(self) -> None:
        if self.kind not in METRIC_KINDS:
            raise DataError(f"unknown match metric '{self.kind}'")
        if not 0.0 <= self.combined_weight <= 1.0:
            raise DataError("combined_weight must be in [0, 1]")


def _ratio_cost(a: float, b: float, what: str) -> float:
    top = max(a, b)
    if top == 0.0:
        warnings.warn(f"both nodes have zero {what}, treating them as identical", stacklevel=3)
        return 0.0
    return abs(a - b) / top


def node_cost(a: NodeAttrs, b: NodeAttrs, metric: MatchMetric) -> float:
    """Dissimilarity of two nodes under the chosen metric, in [0, 1]."""
    if metric.kind == "persistence":
        return _ratio_cost(a.persistence, b.persistence, "persistence")
    if metric.kind == "volume":
        return _ratio_cost(a.volume, b.volume, "volume")
    if metric.kind == "combined":
        w = metric.combined_weight
        return w * _ratio_cost(a.persistence, b.persistence, "persistence") + (
            1.0 - w
        ) * _ratio_cost(a.volume, b.volume, "volume")
    union = a.segment | b.segment
    if not union:
        return 0.0
    # single division so the result is the correctly rounded rational
    return (len(union) - len(a.segment & b.segment)) / len(union)


@dataclass
class MemberRef:
    """One per-step contour tree node folded into an alignment node.

    `attrs` is None for sessions loaded from cache, which no longer
    need the branch attributes the alignment was built with.
    """

    node_id: int
    vertex: int
    value: float
    kind: str
    attrs: Optional[NodeAttrs]


@dataclass
class AlignmentNode:
    id: int
    value: float
    frequency: int
    color_key: int
    members: Dict[int, MemberRef]
    attrs: Optional[NodeAttrs] = None


class AlignmentTree:
    """Rooted fuzzy supertree over a set of aligned time steps."""

    def __init__(
        self,
        nodes: Dict[int, AlignmentNode],
        parent: Dict[int, Optional[int]],
        root_id: int,
        aligned_steps: Sequence[int],
        value_range: Tuple[float, float],
        next_id: int,
        selected_steps: Optional[Sequence[int]] = None,
    ):
        self.nodes = nodes
        self.parent = parent
        self.root_id = root_id
        self.aligned_steps = sorted(aligned_steps)
        self.selected_steps = (
            sorted(selected_steps) if selected_steps is not None else list(self.aligned_steps)
        )
        self.value_range = value_range
        self.next_id = next_id
        self.children: Dict[int, List[int]] = {nid: [] for nid in nodes}
        for nid, par in parent.items():
            if par is not None:
                self.children[par].append(nid)
        for nid in self.children:
            self.children[nid].sort()

    def __len__(self) -> int:
        return len(self.nodes)

    def node_key(self, nid: int) -> Tuple[float, int]:
        return (self.nodes[nid].value, nid)

    def leaves(self) -> List[int]:
        return [nid for nid in sorted(self.nodes) if not self.children[nid]]

    def global_min_node(self) -> int:
        return min(self.nodes, key=self.node_key)

    def subtree_nodes(self, nid: int) -> List[int]:
        out = []
        stack = [nid]
        while stack:
            cur = stack.pop()
            out.append(cur)
            stack.extend(self.children[cur])
        return out

    def degree(self, nid: int) -> int:
        return len(self.children[nid]) + (0 if self.parent[nid] is None else 1)

    def adjacency(self) -> Dict[int, List[int]]:
        adj: Dict[int, List[int]] = {nid: list(self.children[nid]) for nid in self.nodes}
        for nid, par in self.parent.items():
            if par is not None:
                adj[nid].append(par)
        for nid in adj:
            adj[nid].sort()
        return adj


def initial_alignment(tree: ContourTree, t: int) -> AlignmentTree:
    """Wrap a single contour tree as a one-step alignment."""
    decomposition = branch_decomposition(tree)
    attrs = node_attributes(tree, decomposition)
    root, parent, _ = tree.rooted()
    nodes: Dict[int, AlignmentNode] = {}
    for nid, node in tree.nodes.items():
        ref = MemberRef(nid, node.vertex, node.value, node.kind, attrs[nid])
        nodes[nid] = AlignmentNode(
            id=nid,
            value=node.value,
            frequency=1,
            color_key=nid,
            members={t: ref},
            attrs=attrs[nid],
        )
    return AlignmentTree(
        nodes=nodes,
        parent=dict(parent),
        root_id=root,
        aligned_steps=[t],
        value_range=tree.value_range(),
        next_id=max(nodes) + 1,
    )


# ---------------------------------------------------------------------------
# pairwise alignment
# ---------------------------------------------------------------------------

_MATCH, _INSERT_BASE, _INSERT_TREE = 0, 1, 2


class _PairAligner:
    def __init__(
        self,
        base: AlignmentTree,
        tree: ContourTree,
        t: int,
        metric: MatchMetric,
        prev_step: Optional[int],
    ):
        self.base = base
        self.tree = tree
        self.t = t
        self.metric = metric
        self.prev_step = prev_step
        decomposition = branch_decomposition(tree)
        self.tree_attrs = node_attributes(tree, decomposition)
        self.tree_root, self.tree_parent, self.tree_children = tree.rooted()
        self.size_a: Dict[int, int] = {}
        self.size_b: Dict[int, int] = {}
        for nid in base.nodes:
            self.size_a[nid] = len(base.subtree_nodes(nid))
        for nid in tree.nodes:
            self.size_b[nid] = self._tree_subtree_size(nid)
        # scores are (cost, -preserved matches): at equal cost the plan
        # keeping more vertices matched as in the neighboring step wins
        self.s_memo: Dict[Tuple[int, int], Tuple[Tuple[float, int], int, tuple]] = {}
        self.fa_memo: Dict[Tuple[tuple, tuple], Tuple[Tuple[float, int], tuple]] = {}

    def _tree_subtree_size(self, nid: int) -> int:
        if nid in self.size_b:
            return self.size_b[nid]
        total = 1
        for ch in self.tree_children[nid]:
            total += self._tree_subtree_size(ch)
        self.size_b[nid] = total
        return total

    def _preserves(self, a: int, b: int) -> bool:
        if self.prev_step is None:
            return False
        ref = self.base.nodes[a].members.get(self.prev_step)
        return ref is not None and ref.vertex == self.tree.nodes[b].vertex

    def _node_cost(self, a: int, b: int) -> float:
        attrs_a = self.base.nodes[a].attrs
        if attrs_a is None:
            raise DataError("alignment tree is missing node attributes")
        return node_cost(attrs_a, self.tree_attrs[b], self.metric)

    def _solve_s(self, a: int, b: int) -> Tuple[Tuple[float, int], int, tuple]:
        key = (a, b)
        hit = self.s_memo.get(key)
        if hit is not None:
            return hit
        ch_a = tuple(self.base.children[a])
        ch_b = tuple(self.tree_children[b])
        options = []
        (cost_m, pres_m), plan_m = self._solve_fa(ch_a, ch_b)
        pres_here = -1 if self._preserves(a, b) else 0
        options.append(
            ((self._node_cost(a, b) + cost_m, pres_m + pres_here), _MATCH, plan_m)
        )
        (cost_ia, pres_ia), plan_ia = self._solve_fa(ch_a, (b,))
        options.append(((1.0 + cost_ia, pres_ia), _INSERT_BASE, plan_ia))
        (cost_ib, pres_ib), plan_ib = self._solve_fa((a,), ch_b)
        options.append(((1.0 + cost_ib, pres_ib), _INSERT_TREE, plan_ib))
        best = min(options, key=lambda o: (o[0], o[1]))
        self.s_memo[key] = best
        return best

    def _solve_fa(self, ch_a: tuple, ch_b: tuple) -> Tuple[Tuple[float, int], tuple]:
        key = (ch_a, ch_b)
        hit = self.fa_memo.get(key)
        if hit is not None:
            return hit
        best: Optional[Tuple[Tuple[float, int], tuple, tuple]] = None
        # every tree child either pairs with an unused base child or
        # stays unmatched; base children left over count whole subtrees
        for assignment in itertools.product(*[(None,) + ch_a for _ in ch_b]):
            used = [x for x in assignment if x is not None]
            if len(used) != len(set(used)):
                continue
            cost = 0.0
            pres = 0
            pairs = []
            for y, x in zip(ch_b, assignment):
                if x is None:
                    cost += self.size_b[y]
                else:
                    (sub_cost, sub_pres), _, _ = self._solve_s(x, y)
                    cost += sub_cost
                    pres += sub_pres
                    pairs.append((x, y))
            for x in ch_a:
                if x not in used:
                    cost += self.size_a[x]
            pairs.sort()
            rank = (-len(pairs), tuple(pairs))
            if best is None or ((cost, pres), rank) < (best[0], best[1]):
                best = ((cost, pres), rank, tuple(pairs))
        assert best is not None
        self.fa_memo[key] = (best[0], best[2])
        return self.fa_memo[key]

    # -- reconstruction -------------------------------------------------

    def run(self) -> AlignmentTree:
        root_a = self.base.root_id
        root_b = self.tree_root
        _, plan = self._solve_fa(
            tuple(self.base.children[root_a]), tuple(self.tree_children[root_b])
        )
        self.out_nodes: Dict[int, AlignmentNode] = {}
        self.out_parent: Dict[int, Optional[int]] = {}
        self.fresh = self.base.next_id
        self._emit_match(root_a, root_b, None, plan)
        tree_range = self.tree.value_range()
        return AlignmentTree(
            nodes=self.out_nodes,
            parent=self.out_parent,
            root_id=root_a,
            aligned_steps=list(self.base.aligned_steps) + [self.t],
            value_range=(
                min(self.base.value_range[0], tree_range[0]),
                max(self.base.value_range[1], tree_range[1]),
            ),
            next_id=self.fresh,
        )

    def _member_ref(self, b: int) -> MemberRef:
        node = self.tree.nodes[b]
        return MemberRef(b, node.vertex, node.value, node.kind, self.tree_attrs[b])

    def _emit_match(self, a: int, b: int, parent: Optional[int], plan: tuple) -> None:
        src = self.base.nodes[a]
        members = dict(src.members)
        members[self.t] = self._member_ref(b)
        self.out_nodes[a] = AlignmentNode(
            id=a,
            value=src.value,
            frequency=src.frequency + 1,
            color_key=src.color_key,
            members=members,
            attrs=src.attrs,
        )
        self.out_parent[a] = parent
        self._emit_fa(a, b, plan, tuple(self.base.children[a]), tuple(self.tree_children[b]))

    def _emit_fa(self, host: int, b_host: Optional[int], plan: tuple, ch_a: tuple, ch_b: tuple) -> None:
        paired_a = {x for x, _ in plan}
        paired_b = {y for _, y in plan}
        for x, y in plan:
            self._emit_s(x, y, host)
        for x in ch_a:
            if x not in paired_a:
                self._emit_base_subtree(x, host)
        for y in ch_b:
            if y not in paired_b:
                self._emit_tree_subtree(y, host)

    def _emit_s(self, a: int, b: int, parent: Optional[int]) -> None:
        _, choice, plan = self._solve_s(a, b)
        if choice == _MATCH:
            self._emit_match(a, b, parent, plan)
        elif choice == _INSERT_BASE:
            src = self.base.nodes[a]
            self.out_nodes[a] = AlignmentNode(
                id=a,
                value=src.value,
                frequency=src.frequency,
                color_key=src.color_key,
                members=dict(src.members),
                attrs=src.attrs,
            )
            self.out_parent[a] = parent
            self._emit_fa(a, None, plan, tuple(self.base.children[a]), (b,))
        else:
            nid = self.fresh
            self.fresh += 1
            ref = self._member_ref(b)
            self.out_nodes[nid] = AlignmentNode(
                id=nid,
                value=ref.value,
                frequency=1,
                color_key=nid,
                members={self.t: ref},
                attrs=ref.attrs,
            )
            self.out_parent[nid] = parent
            self._emit_fa(nid, None, plan, (a,), tuple(self.tree_children[b]))

    def _emit_base_subtree(self, a: int, parent: Optional[int]) -> None:
        src = self.base.nodes[a]
        self.out_nodes[a] = AlignmentNode(
            id=a,
            value=src.value,
            frequency=src.frequency,
            color_key=src.color_key,
            members=dict(src.members),
            attrs=src.attrs,
        )
        self.out_parent[a] = parent
        for ch in self.base.children[a]:
            self._emit_base_subtree(ch, a)

    def _emit_tree_subtree(self, b: int, parent: Optional[int]) -> None:
        nid = self.fresh
        self.fresh += 1
        ref = self._member_ref(b)
        self.out_nodes[nid] = AlignmentNode(
            id=nid,
            value=ref.value,
            frequency=1,
            color_key=nid,
            members={self.t: ref},
            attrs=ref.attrs,
        )
        self.out_parent[nid] = parent
        for ch in self.tree_children[b]:
            self._emit_tree_subtree(ch, nid)


def align_pair(
    base: AlignmentTree,
    tree: ContourTree,
    t: int,
    metric: MatchMetric,
    prev_step: Optional[int] = None,
) -> AlignmentTree:
    """Fold one more contour tree into an alignment.

    The roots (global maxima) match unconditionally at cost zero.  `t`
    names the time step the tree belongs to; `prev_step` enables the
    tie-break that keeps vertices matched the way they were in the
    neighboring step.
    """
    if t in base.aligned_steps:
        raise DataError(f"step {t} is already part of the alignment")
    return _PairAligner(base, tree, t, metric, prev_step).run()


def update_alignment_values(alignment: AlignmentTree, t: int) -> AlignmentTree:
    """Refresh node values (and attributes) from the member nodes of step t.

    Nodes without a member at t keep their current value.  Mutates and
    returns the alignment.
    """
    if t not in alignment.aligned_steps:
        raise DataError(f"step {t} is not part of the alignment")
    for node in alignment.nodes.values():
        ref = node.members.get(t)
        if ref is not None:
            node.value = ref.value
            node.attrs = ref.attrs
    return alignment


def align_sequence(
    trees: Sequence[ContourTree],
    metric: MatchMetric,
    first: int = 0,
) -> AlignmentTree:
    """Align a whole sequence of contour trees.

    Folding starts at `first`, walks forward to the end, then backward
    from `first` to the start, refreshing node values after every fold so
    each pairwise step compares against the neighboring time step.  The
    result is normalized so node values come from the highest-index step
    they are members of, regardless of the seed.
    """
    if not trees:
        raise DataError("cannot align an empty tree sequence")
    if not 0 <= first < len(trees):
        raise DataError(f"seed step {first} outside 0..{len(trees) - 1}")
    alignment = initial_alignment(trees[first], first)
    for t in range(first + 1, len(trees)):
        alignment = align_pair(alignment, trees[t], t, metric, prev_step=t - 1)
        update_alignment_values(alignment, t)
    if first > 0:
        update_alignment_values(alignment, first)
        for t in range(first - 1, -1, -1):
            alignment = align_pair(alignment, trees[t], t, metric, prev_step=t + 1)
            update_alignment_values(alignment, t)
        for t in range(len(trees)):
            update_alignment_values(alignment, t)
    return alignment


def sub_alignment(alignment: AlignmentTree, steps: Iterable[int]) -> AlignmentTree:
    """Restrict an alignment to the nodes present in the given steps.

    Keeps ids, colors and values; recomputes frequencies against the
    selection; reconnects children of dropped nodes to their nearest
    surviving ancestor.
    """
    selected = sorted(set(int(s) for s in steps))
    if not selected:
        raise DataError("selection must contain at least one step")
    missing = [s for s in selected if s not in alignment.aligned_steps]
    if missing:
        raise DataError(f"steps {missing} are not part of the alignment")
    sel_set = set(selected)
    keep = {
        nid
        for nid, node in alignment.nodes.items()
        if sel_set & node.members.keys()
    }
    if alignment.root_id not in keep:
        raise DataError("alignment root lost all members, selection is inconsistent")
    nodes: Dict[int, AlignmentNode] = {}
    parent: Dict[int, Optional[int]] = {}
    for nid in keep:
        src = alignment.nodes[nid]
        members = {t: ref for t, ref in src.members.items() if t in sel_set}
        nodes[nid] = AlignmentNode(
            id=nid,
            value=src.value,
            frequency=len(members),
            color_key=src.color_key,
            members=members,
            attrs=src.attrs,
        )
        anc = alignment.parent[nid]
        while anc is not None and anc not in keep:
            anc = alignment.parent[anc]
        parent[nid] = anc
    return AlignmentTree(
        nodes=nodes,
        parent=parent,
        root_id=alignment.root_id,
        aligned_steps=list(alignment.aligned_steps),
        value_range=alignment.value_range,
        next_id=alignment.next_id,
        selected_steps=selected,
    )
