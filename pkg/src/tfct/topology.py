"""Contour trees of 2D scalar grids.

Join and split sweeps with union-find, leaf-pruning combination of the
two merge trees into a contour tree, segmentation of regular vertices
onto arcs, persistence simplification, and branch decomposition.

All vertex comparisons go through the strict total order of
:mod:`tfct.dataset_io` (value, then vertex index), so plateaus never
produce ties.  Grids use 4-connectivity.
"""

from __future__ import annotations

import heapq
import warnings
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Tuple

import numpy as np

from .dataset_io import DataError, ScalarGrid, TotalOrder

ArcKey = Tuple[int, int]

KIND_MINIMUM = "minimum"
KIND_MAXIMUM = "maximum"
KIND_SADDLE = "saddle"
KIND_ROOT_DEGENERATE = "root_degenerate"


def grid_neighbors(width: int, height: int, vertex: int) -> List[int]:
    """4-neighbors of a vertex in row-major indexing."""
    x = vertex % width
    y = vertex // width
    out = []
    if x > 0:
        out.append(vertex - 1)
    if x < width - 1:
        out.append(vertex + 1)
    if y > 0:
        out.append(vertex - width)
    if y < height - 1:
        out.append(vertex + width)
    return out


def arc_key(a: int, b: int) -> ArcKey:
    return (a, b) if a < b else (b, a)


# ---------------------------------------------------------------------------
# merge trees
# ---------------------------------------------------------------------------


@dataclass
class MergeTree:
    """Join or split tree of one grid.

    `link[v]` points from every vertex to the vertex its sweep component
    was attached to (towards the sweep root, -1 at the root), which keeps
    the full augmented structure around for the combine step.  The
    reduced tree over critical vertices plus the sweep root is exposed in
    `node_vertices` / `node_parent`.
    """

    direction: str
    width: int
    height: int
    values: np.ndarray
    link: np.ndarray
    root_vertex: int
    node_vertices: List[int]
    node_parent: Dict[int, Optional[int]]
    kinds: Dict[int, str]

    @property
    def n_vertices(self) -> int:
        return len(self.link)


class _UnionFind:
    def __init__(self, n: int):
        self.parent = np.arange(n, dtype=np.int64)

    def find(self, v: int) -> int:
        root = v
        parent = self.parent
        while parent[root] != root:
            root = parent[root]
        while parent[v] != root:
            parent[v], v = root, parent[v]
        return root

    def union(self, a: int, b: int) -> int:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb
        return rb


def compute_merge_tree(grid: ScalarGrid, direction: str) -> MergeTree:
    """Sweep the grid once and build the join or split tree.

    The join tree tracks superlevel-set components (sweep from high to
    low, maxima appear as leaves), the split tree tracks sublevel-set
    components.  Nodes of the reduced tree are the sweep-critical
    vertices plus the closing root vertex.
    """
    if direction not in ("join", "split"):
        raise DataError(f"unknown sweep direction '{direction}'")
    order = TotalOrder(grid.values)
    sweep = order.sorted_vertices(descending=(direction == "join"))
    n = grid.size
    seen = np.zeros(n, dtype=bool)
    link = np.full(n, -1, dtype=np.int64)
    child_count = np.zeros(n, dtype=np.int64)
    uf = _UnionFind(n)
    # head[c] = vertex the component c was most recently extended with
    head = np.arange(n, dtype=np.int64)
    for v in sweep:
        for u in grid_neighbors(grid.width, grid.height, int(v)):
            if not seen[u]:
                continue
            root = uf.find(u)
            tip = head[root]
            if tip == v:
                continue
            link[tip] = v
            child_count[v] += 1
            merged = uf.union(root, uf.find(v))
            head[merged] = v
        seen[v] = True
        head[uf.find(v)] = v
    root_vertex = int(sweep[-1])

    criticals = [int(v) for v in range(n) if child_count[v] != 1]
    if root_vertex not in criticals:
        criticals.append(root_vertex)
    critical_set = set(criticals)
    node_parent: Dict[int, Optional[int]] = {}
    for v in criticals:
        cur = int(link[v])
        while cur != -1 and cur not in critical_set:
            cur = int(link[cur])
        node_parent[v] = cur if cur != -1 else None
    kinds: Dict[int, str] = {}
    leaf_kind = KIND_MAXIMUM if direction == "join" else KIND_MINIMUM
    for v in criticals:
        if v == root_vertex and child_count[v] < 2:
            kinds[v] = KIND_ROOT_DEGENERATE
        elif child_count[v] == 0:
            kinds[v] = leaf_kind
        else:
            kinds[v] = KIND_SADDLE
    return MergeTree(
        direction=direction,
        width=grid.width,
        height=grid.height,
        values=grid.values,
        link=link,
        root_vertex=root_vertex,
        node_vertices=sorted(criticals),
        node_parent=node_parent,
        kinds=kinds,
    )


# ---------------------------------------------------------------------------
# contour trees
# ---------------------------------------------------------------------------


@dataclass
class TreeNode:
    id: int
    vertex: int
    value: float
    kind: str


class ContourTree:
    """A contour tree with arc segmentation.

    `segments` maps each arc to the set of grid vertices contracted into
    it; the segments partition the full vertex set.  Node ids equal grid
    vertex indices for sweep-derived trees; saddle unfolding introduces
    fresh ids beyond the vertex range.
    """

    def __init__(
        self,
        nodes: Dict[int, TreeNode],
        segments: Dict[ArcKey, FrozenSet[int]],
        n_vertices: int,
    ):
        if len(nodes) < 2:
            raise DataError("a contour tree needs at least two nodes")
        if len(segments) != len(nodes) - 1:
            raise DataError(
                f"{len(nodes)} nodes need {len(nodes) - 1} arcs, got {len(segments)}"
            )
        self.nodes = nodes
        self.segments = {arc_key(*k): frozenset(v) for k, v in segments.items()}
        self.n_vertices = n_vertices
        self.adjacency: Dict[int, List[int]] = {nid: [] for nid in nodes}
        for a, b in self.segments:
            if a not in nodes or b not in nodes:
                raise DataError(f"arc ({a},{b}) references unknown node")
            self.adjacency[a].append(b)
            self.adjacency[b].append(a)
        for nid in self.adjacency:
            self.adjacency[nid].sort()
        self.vertex_arc: Dict[int, ArcKey] = {}
        for key, seg in self.segments.items():
            for v in seg:
                if v in self.vertex_arc:
                    raise DataError(f"vertex {v} assigned to two arcs")
                self.vertex_arc[v] = key
        if len(self.vertex_arc) != n_vertices:
            raise DataError(
                f"segments cover {len(self.vertex_arc)} of {n_vertices} vertices"
            )

    # -- basic queries ------------------------------------------------

    def node_key(self, nid: int) -> Tuple[float, int, int]:
        """Strict total order on nodes: value, vertex, then node id.

        The id settles ties between chain nodes that saddle unfolding
        places at the same value and vertex.
        """
        node = self.nodes[nid]
        return (node.value, node.vertex, nid)

    def degree(self, nid: int) -> int:
        return len(self.adjacency[nid])

    def leaves(self) -> List[int]:
        return [nid for nid in sorted(self.nodes) if self.degree(nid) == 1]

    def global_min_node(self) -> int:
        return min(self.nodes, key=self.node_key)

    def global_max_node(self) -> int:
        return max(self.nodes, key=self.node_key)

    def root_id(self) -> int:
        """Root convention for alignment and layout: the global maximum."""
        return self.global_max_node()

    def value_range(self) -> Tuple[float, float]:
        return (
            self.nodes[self.global_min_node()].value,
            self.nodes[self.global_max_node()].value,
        )

    def up_neighbors(self, nid: int) -> List[int]:
        key = self.node_key(nid)
        return [m for m in self.adjacency[nid] if self.node_key(m) > key]

    def down_neighbors(self, nid: int) -> List[int]:
        key = self.node_key(nid)
        return [m for m in self.adjacency[nid] if self.node_key(m) < key]

    def rooted(self) -> Tuple[int, Dict[int, Optional[int]], Dict[int, List[int]]]:
        """(root, parent map, children map) rooted at the global maximum."""
        root = self.root_id()
        parent: Dict[int, Optional[int]] = {root: None}
        children: Dict[int, List[int]] = {nid: [] for nid in self.nodes}
        stack = [root]
        while stack:
            cur = stack.pop()
            for nb in self.adjacency[cur]:
                if nb not in parent:
                    parent[nb] = cur
                    children[cur].append(nb)
                    stack.append(nb)
        for nid in children:
            children[nid].sort()
        return root, parent, children

    def is_binary(self) -> bool:
        return all(self.degree(nid) <= 3 for nid in self.nodes)


def combine(join_tree: MergeTree, split_tree: MergeTree) -> ContourTree:
    """Merge the join and split sweeps of one grid into its contour tree.

    Rebuilds the augmented tree in a single descending pass.  Every
    vertex hooks onto the attachment vertex of each superlevel component
    it touches and then takes the attachment role for the merged
    component; split-tree leaves skip the takeover, which keeps their
    profile purely upward so they come out of saddle unfolding as
    minimum leaves.  Join-tree leaves open fresh components and keep a
    purely downward profile.  A 4-connected grid is a graph rather than
    a filled surface, so two monotone regions can run in parallel
    between the same pair of vertices; the attachment rule folds such a
    loop at the vertex where its sides meet, and the handover order
    guarantees every interior vertex ends with at least one arc on each
    side.  The result is always a spanning tree of the vertex set with
    endpoint values bracketing every arc.
    """
    if join_tree.direction != "join" or split_tree.direction != "split":
        raise DataError("combine expects one join tree and one split tree")
    if (
        join_tree.n_vertices != split_tree.n_vertices
        or join_tree.width != split_tree.width
        or not np.array_equal(join_tree.values, split_tree.values)
    ):
        raise DataError("join and split trees disagree on the vertex set")

    n = join_tree.n_vertices
    values = join_tree.values
    width, height = join_tree.width, join_tree.height
    order = TotalOrder(values)
    minima = {v for v, kind in split_tree.kinds.items() if kind == KIND_MINIMUM}

    def order_key(v: int) -> Tuple[float, int]:
        return (float(values[v]), v)

    uf = _UnionFind(n)
    att = np.arange(n, dtype=np.int64)
    seen = np.zeros(n, dtype=bool)
    arcs_aug: List[Tuple[int, int]] = []
    for sweep_v in order.sorted_vertices(descending=True):
        v = int(sweep_v)
        roots: List[int] = []
        for u in grid_neighbors(width, height, v):
            if seen[u]:
                r = uf.find(u)
                if r not in roots:
                    roots.append(r)
        seen[v] = True
        if not roots:
            continue
        hooks = [int(att[r]) for r in roots]
        for x in hooks:
            arcs_aug.append((x, v))
        root = uf.find(v)
        for r in roots:
            root = uf.union(root, r)
        att[root] = min(hooks, key=order_key) if v in minima else v
    if len(arcs_aug) != n - 1:
        raise DataError("merge trees are inconsistent, combine left gaps")

    # contract regular vertices (exactly one arc up, one down) into segments
    above: List[List[int]] = [[] for _ in range(n)]
    below: List[List[int]] = [[] for _ in range(n)]
    for hi, lo in arcs_aug:
        below[hi].append(lo)
        above[lo].append(hi)

    def is_node(v: int) -> bool:
        return not (len(above[v]) == 1 and len(below[v]) == 1)

    nodes: Dict[int, TreeNode] = {}
    for v in range(n):
        if not is_node(v):
            continue
        if len(above[v]) == 0:
            kind = KIND_MAXIMUM
        elif len(below[v]) == 0:
            kind = KIND_MINIMUM
        else:
            kind = KIND_SADDLE
        nodes[v] = TreeNode(id=v, vertex=v, value=float(values[v]), kind=kind)

    segments: Dict[ArcKey, Set[int]] = {}
    for start in sorted(nodes):
        for first in sorted(above[start]) + sorted(below[start]):
            prev, cur = start, first
            chain: List[int] = []
            while not is_node(cur):
                chain.append(cur)
                nbs = [w for w in above[cur] + below[cur] if w != prev]
                prev, cur = cur, nbs[0]
            key = arc_key(start, cur)
            if key not in segments:
                segments[key] = set(chain)

    # the partition also covers the critical vertices themselves: each node
    # vertex joins its arc towards the smallest higher neighbor, or the
    # smallest arc at the global maximum
    adjacency: Dict[int, List[int]] = {nid: [] for nid in nodes}
    for a, b in segments:
        adjacency[a].append(b)
        adjacency[b].append(a)
    for nid in sorted(nodes):
        ups = [m for m in adjacency[nid] if order.less(nid, m)]
        target = min(ups) if ups else min(adjacency[nid])
        segments[arc_key(nid, target)].add(nid)

    return ContourTree(nodes, {k: frozenset(v) for k, v in segments.items()}, n)


def _proper_shape(ups: int, downs: int) -> bool:
    return ups + downs == 1 or (ups, downs) in ((1, 1), (1, 2), (2, 1))


def _unfold_one(tree: ContourTree, target: int) -> ContourTree:
    """Replace one improper node with a monotone chain of proper nodes."""

    def side_extreme(nb: int) -> Tuple[float, int, int]:
        # extremal key of the component hanging off `target` through `nb`
        keys = []
        stack = [nb]
        seen = {target, nb}
        while stack:
            cur = stack.pop()
            keys.append(tree.node_key(cur))
            for m in tree.adjacency[cur]:
                if m not in seen:
                    seen.add(m)
                    stack.append(m)
        if tree.node_key(nb) > tree.node_key(target):
            return max(keys)
        return min(keys)

    downs = sorted(tree.down_neighbors(target), key=side_extreme)
    ups = sorted(tree.up_neighbors(target), key=side_extreme)
    u, d = len(ups), len(downs)
    base = tree.nodes[target]

    nodes: Dict[int, TreeNode] = {
        nid: TreeNode(n.id, n.vertex, n.value, n.kind) for nid, n in tree.nodes.items()
    }
    segments: Dict[ArcKey, Set[int]] = {k: set(v) for k, v in tree.segments.items()}
    moved: Dict[int, Set[int]] = {}
    for nb in downs + ups:
        moved[nb] = segments.pop(arc_key(target, nb))

    next_id = max(nodes) + 1

    def fresh_saddle() -> int:
        nonlocal next_id
        nodes[next_id] = TreeNode(next_id, base.vertex, base.value, KIND_SADDLE)
        next_id += 1
        return next_id - 1

    # chain runs bottom to top; fresh ids sort above the original id, so
    # the original node stays lowest
    if d == 0:
        # a minimum that also merges components: keep it as the leaf,
        # stack u - 1 saddles above it, topmost takes two up arcs
        chain = [target] + [fresh_saddle() for _ in range(u - 1)]
        capacity = [0] + [1] * (u - 2) + [2]
    elif u == 0:
        # mirrored: the chain ends in a fresh maximum leaf on top
        nodes[target].kind = KIND_SADDLE
        chain = [target] + [fresh_saddle() for _ in range(d - 2)]
        capacity = [2] + [1] * (d - 2)
        leaf = next_id
        nodes[leaf] = TreeNode(leaf, base.vertex, base.value, KIND_MAXIMUM)
        next_id += 1
        chain.append(leaf)
        capacity.append(0)
    else:
        length = u + d - 2
        chain = [target] + [fresh_saddle() for _ in range(length - 1)]
        capacity = [2] + [1] * (length - 2) + [2]

    for a, b in zip(chain, chain[1:]):
        segments[arc_key(a, b)] = set()
    it = iter(downs + ups)
    for host, take in zip(chain, capacity):
        for _ in range(take):
            nb = next(it)
            segments[arc_key(host, nb)] = moved[nb]

    return ContourTree(nodes, {k: frozenset(v) for k, v in segments.items()}, tree.n_vertices)


def unfold_degenerate_saddles(tree: ContourTree) -> ContourTree:
    """Rebuild improper nodes into chains of proper degree-3 saddles.

    Proper nodes are leaves, pass-through nodes, and saddles with one
    arc on one side and two on the other.  Any node with more arcs
    becomes a monotone chain of saddles at the same value and vertex;
    an extremum that also merges components (all arcs on one side, as
    happens on discrete grids) grows an explicit extremum leaf at the
    end of its chain, so strict extrema always stay leaves.  Incident
    subtrees attach bottom-up in ascending total order of their
    extremal node, making the result deterministic.  Chain arcs carry
    empty segments.  Trees without improper nodes come back
    structurally unchanged.
    """
    result = tree
    changed = False
    while True:
        target = next(
            (
                nid
                for nid in sorted(result.nodes)
                if not _proper_shape(
                    len(result.up_neighbors(nid)), len(result.down_neighbors(nid))
                )
            ),
            None,
        )
        if target is None:
            break
        result = _unfold_one(result, target)
        changed = True
    if not changed:
        return ContourTree(
            {nid: TreeNode(n.id, n.vertex, n.value, n.kind) for nid, n in tree.nodes.items()},
            dict(tree.segments),
            tree.n_vertices,
        )
    return result


def contour_tree(grid: ScalarGrid, simplify_threshold: float = 0.0) -> ContourTree:
    """Full per-grid pipeline: both sweeps, combine, unfold, simplify."""
    if grid.is_constant():
        warnings.warn(
            "constant grid: contour tree degenerates to a single arc",
            stacklevel=2,
        )
    join = compute_merge_tree(grid, "join")
    split = compute_merge_tree(grid, "split")
    tree = unfold_degenerate_saddles(combine(join, split))
    if simplify_threshold > 0.0:
        tree = simplify(tree, simplify_threshold)
    return tree


# ---------------------------------------------------------------------------
# persistence simplification
# ---------------------------------------------------------------------------


def simplify(tree: ContourTree, threshold: float, drop_zero: bool = False) -> ContourTree:
    """Prune low-persistence leaf arcs.

    Repeatedly removes the lowest-persistence leaf arc whose persistence
    is strictly below `threshold` (or exactly zero when `drop_zero` is
    set), merging its segment into the neighboring arc.  The global
    minimum and maximum survive any threshold, so an infinite threshold
    yields the two-node tree.
    """
    if threshold < 0:
        raise DataError("simplification threshold must be >= 0")
    nodes = {nid: TreeNode(n.id, n.vertex, n.value, n.kind) for nid, n in tree.nodes.items()}
    segments: Dict[ArcKey, Set[int]] = {k: set(v) for k, v in tree.segments.items()}
    adj: Dict[int, Set[int]] = {nid: set(tree.adjacency[nid]) for nid in nodes}
    protected = {tree.global_min_node(), tree.global_max_node()}

    def persistence(leaf: int, partner: int) -> float:
        return abs(nodes[leaf].value - nodes[partner].value)

    def prunable(pers: float) -> bool:
        return pers < threshold or (drop_zero and pers == 0.0)

    heap: List[Tuple[float, Tuple[float, int], int, int]] = []
    for leaf in sorted(nodes):
        if len(adj[leaf]) == 1 and leaf not in protected:
            partner = next(iter(adj[leaf]))
            heapq.heappush(
                heap, (persistence(leaf, partner), tree.node_key(leaf), leaf, partner)
            )

    while heap:
        pers, _, leaf, partner = heapq.heappop(heap)
        if leaf not in adj or len(adj[leaf]) != 1:
            continue
        current = next(iter(adj[leaf]))
        if current != partner or persistence(leaf, current) != pers:
            heapq.heappush(
                heap, (persistence(leaf, current), tree.node_key(leaf), leaf, current)
            )
            continue
        if not prunable(pers):
            break
        if len(nodes) <= 2:
            break
        absorbed = set(segments.pop(arc_key(leaf, partner)))
        adj[partner].discard(leaf)
        del adj[leaf]
        del nodes[leaf]
        if len(adj[partner]) == 2 and partner not in protected:
            a, b = sorted(adj[partner])
            merged = (
                set(segments.pop(arc_key(partner, a)))
                | set(segments.pop(arc_key(partner, b)))
                | absorbed
            )
            adj[a].discard(partner)
            adj[b].discard(partner)
            adj[a].add(b)
            adj[b].add(a)
            del adj[partner]
            del nodes[partner]
            segments[arc_key(a, b)] = segments.get(arc_key(a, b), set()) | merged
        else:
            # no contraction: fold the freed segment into the arc towards
            # the smallest remaining neighbor
            target = min(adj[partner])
            segments[arc_key(partner, target)] |= absorbed
        for cand in [p for p in (partner,) if p in adj]:
            if len(adj[cand]) == 1 and cand not in protected:
                nb = next(iter(adj[cand]))
                heapq.heappush(
                    heap, (persistence(cand, nb), tree.node_key(cand), cand, nb)
                )

    return ContourTree(nodes, {k: frozenset(v) for k, v in segments.items()}, tree.n_vertices)


# ---------------------------------------------------------------------------
# branch decomposition
# ---------------------------------------------------------------------------


@dataclass
class Branch:
    id: int
    top_node: int
    bottom_node: int
    parent_branch: Optional[int]
    attachment_saddle: Optional[int]
    persistence: float
    volume: int
    node_path: List[int]
    owned_nodes: List[int]
    arc_keys: List[ArcKey]
    key_node: int
    anchor_node: int


@dataclass
class BranchDecomposition:
    branches: List[Branch]
    main_branch_id: int
    node_branch: Dict[int, int]

    def by_key(self) -> Dict[int, int]:
        return {b.key_node: b.id for b in self.branches}

    def branch_of(self, node_id: int) -> Branch:
        return self.branches[self.node_branch[node_id]]


def _cancel_leaves(
    node_ids: Iterable[int],
    adjacency: Dict[int, List[int]],
    key_of,
    protected: Set[int],
):
    """Shared leaf-cancellation engine.

    Cancels the lowest-persistence leaf arc until only the path between
    the two protected endpoints remains.  Returns the cancellation
    records (leaf, saddle, original node path saddle->leaf) and the
    remaining path as an ordered node list.
    """
    adj: Dict[int, Set[int]] = {nid: set(adjacency[nid]) for nid in node_ids}
    # original node sequence hidden inside every (possibly merged) arc
    paths: Dict[ArcKey, List[int]] = {}
    for nid in adj:
        for nb in adj[nid]:
            key = arc_key(nid, nb)
            if key not in paths:
                paths[key] = [key[0], key[1]]

    def oriented(key: ArcKey, start: int) -> List[int]:
        path = paths[key]
        return path if path[0] == start else path[::-1]

    def pers(a: int, b: int) -> float:
        return abs(key_of(a)[0] - key_of(b)[0])

    heap: List[Tuple[float, Tuple[float, int], int, int]] = []
    for nid in sorted(adj):
        if len(adj[nid]) == 1 and nid not in protected:
            nb = next(iter(adj[nid]))
            heapq.heappush(heap, (pers(nid, nb), key_of(nid), nid, nb))

    records = []
    while heap:
        _, _, leaf, partner = heapq.heappop(heap)
        if leaf not in adj or len(adj[leaf]) != 1:
            continue
        current = next(iter(adj[leaf]))
        if current != partner:
            heapq.heappush(heap, (pers(leaf, current), key_of(leaf), leaf, current))
            continue
        key = arc_key(leaf, partner)
        records.append(
            {
                "leaf": leaf,
                "saddle": partner,
                "path": oriented(key, partner),
            }
        )
        del paths[key]
        adj[partner].discard(leaf)
        del adj[leaf]
        if len(adj[partner]) == 2 and partner not in protected:
            a, b = sorted(adj[partner])
            left = oriented(arc_key(a, partner), a)
            right = oriented(arc_key(partner, b), partner)
            del paths[arc_key(a, partner)]
            del paths[arc_key(partner, b)]
            paths[arc_key(a, b)] = left[:-1] + right
            adj[a].discard(partner)
            adj[b].discard(partner)
            adj[a].add(b)
            adj[b].add(a)
            del adj[partner]
        elif len(adj[partner]) == 1 and partner not in protected:
            nb = next(iter(adj[partner]))
            heapq.heappush(heap, (pers(partner, nb), key_of(partner), partner, nb))

    # remaining graph is the path between the protected endpoints
    start = min(protected)
    main_path = [start]
    prev: Optional[int] = None
    cur = start
    while True:
        onward = [n for n in adj[cur] if n != prev]
        if not onward:
            break
        key = arc_key(cur, onward[0])
        main_path.extend(oriented(key, cur)[1:])
        prev, cur = cur, onward[0]
    return records, main_path


def branch_decomposition(tree: ContourTree) -> BranchDecomposition:
    """Decompose a binary contour tree into persistence-ordered branches.

    The main branch spans the global minimum and maximum.  Every other
    branch pairs one leaf with the saddle where it cancels, extracted in
    order of increasing persistence, so persistences never increase from
    parent to child.  A branch's node path starts at its attachment
    saddle; the saddle itself is owned by the parent branch.
    """
    for nid in tree.nodes:
        if tree.degree(nid) > 3:
            raise DataError(f"node {nid} has degree {tree.degree(nid)}, tree is not binary")
        ups, downs = tree.up_neighbors(nid), tree.down_neighbors(nid)
        if tree.degree(nid) >= 2 and (not ups or not downs):
            raise DataError(
                f"node {nid} is a degenerate extremum-saddle, tree is not binary"
            )

    protected = {tree.global_min_node(), tree.global_max_node()}
    records, main_path = _cancel_leaves(
        tree.nodes.keys(), tree.adjacency, tree.node_key, protected
    )

    branches: List[Branch] = []
    node_branch: Dict[int, int] = {}

    def arc_run(path: List[int]) -> List[ArcKey]:
        return [arc_key(a, b) for a, b in zip(path, path[1:])]

    def make_branch(bid: int, path: List[int], saddle: Optional[int]) -> Branch:
        arcs = arc_run(path)
        volume = sum(len(tree.segments[k]) for k in arcs)
        top = max(path, key=tree.node_key)
        bottom = min(path, key=tree.node_key)
        owned = path if saddle is None else path[1:]
        if saddle is None:
            key_node = tree.root_id()
            anchor = path[0] if path[-1] == key_node else path[-1]
        else:
            key_node = path[-1]
            anchor = path[-1]
        return Branch(
            id=bid,
            top_node=top,
            bottom_node=bottom,
            parent_branch=None,
            attachment_saddle=saddle,
            persistence=abs(tree.nodes[top].value - tree.nodes[bottom].value),
            volume=volume,
            node_path=list(path),
            owned_nodes=list(owned),
            arc_keys=arcs,
            key_node=key_node,
            anchor_node=anchor,
        )

    branches.append(make_branch(0, main_path, None))
    for rec in records:
        branches.append(make_branch(len(branches), rec["path"], rec["saddle"]))
    for branch in branches:
        for nid in branch.owned_nodes:
            node_branch[nid] = branch.id
    for branch in branches[1:]:
        branch.parent_branch = node_branch[branch.attachment_saddle]
    return BranchDecomposition(branches=branches, main_branch_id=0, node_branch=node_branch)


@dataclass(frozen=True)
class NodeAttrs:
    """Branch-level attributes a node inherits from its owning branch."""

    persistence: float
    volume: float
    segment: FrozenSet[int]


def node_attributes(tree: ContourTree, decomposition: BranchDecomposition) -> Dict[int, NodeAttrs]:
    """Give every node the persistence, volume and segment of its branch."""
    seg_cache: Dict[int, FrozenSet[int]] = {}
    for branch in decomposition.branches:
        union: Set[int] = set()
        for key in branch.arc_keys:
            union |= tree.segments[key]
        seg_cache[branch.id] = frozenset(union)
    attrs: Dict[int, NodeAttrs] = {}
    for nid in tree.nodes:
        branch = decomposition.branch_of(nid)
        attrs[nid] = NodeAttrs(
            persistence=branch.persistence,
            volume=float(branch.volume),
            segment=seg_cache[branch.id],
        )
    return attrs


def dump_tree(tree: ContourTree) -> str:
    """Plain-text form of a contour tree for external comparison.

    One `a b` line per arc, then one `id vertex value kind` line per
    node, both sorted, so equal trees dump to equal strings.
    """
    lines = [f"{a} {b}" for a, b in sorted(tree.segments)]
    for nid in sorted(tree.nodes):
        node = tree.nodes[nid]
        lines.append(f"{nid} {node.vertex} {node.value!r} {node.kind}")
    return "\n".join(lines) + "\n"
