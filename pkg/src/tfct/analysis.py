"""Structural time series over an alignment.

Centrality of alignment nodes, evaluated on sliding-window
sub-alignments, turns the evolving tree structure into one scalar per
time step.  The direct mode tracks the mean centrality of the window
around each step; the diff mode tracks how much per-node centralities
move between neighboring windows, which peaks when structure appears
or disappears.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Dict, List

from .alignment import AlignmentTree, sub_alignment
from .dataset_io import DataError

MEASURES = ("degree", "betweenness")
MODES = ("direct", "diff")


def degree_centrality(tree: AlignmentTree) -> Dict[int, float]:
    """Degree of every node over the maximum possible degree n - 1."""
    n = len(tree.nodes)
    if n < 2:
        raise DataError("degree centrality needs at least two nodes")
    return {nid: tree.degree(nid) / (n - 1) for nid in tree.nodes}


def betweenness_centrality(tree: AlignmentTree) -> Dict[int, float]:
    """Fraction of node pairs whose path crosses each node.

    On a tree the count has a closed form: removing a node leaves
    components of sizes s_1..s_k, and the paths through it are all
    pairs drawn from two different components.  Normalized by the
    (n-1)(n-2)/2 pairs not involving the node itself; trees with fewer
    than three nodes have no interior paths at all.
    """
    n = len(tree.nodes)
    if n < 3:
        return {nid: 0.0 for nid in tree.nodes}
    subtree: Dict[int, int] = {}

    order: List[int] = []
    stack = [tree.root_id]
    while stack:
        cur = stack.pop()
        order.append(cur)
        stack.extend(tree.children[cur])
    for nid in reversed(order):
        subtree[nid] = 1 + sum(subtree[ch] for ch in tree.children[nid])

    scale = (n - 1) * (n - 2) / 2.0
    out: Dict[int, float] = {}
    for nid in tree.nodes:
        comps = [subtree[ch] for ch in tree.children[nid]]
        if tree.parent[nid] is not None:
            comps.append(n - subtree[nid])
        total = sum(comps)
        pairs = (total * total - sum(c * c for c in comps)) / 2.0
        out[nid] = pairs / scale
    return out


_CENTRALITY = {"degree": degree_centrality, "betweenness": betweenness_centrality}


@dataclass
class SelectorSeries:
    measure: str
    mode: str
    window: int
    values: List[float]
    raw: List[float]


def selector_series(
    alignment: AlignmentTree,
    measure: str = "degree",
    mode: str = "direct",
    window: int = 5,
) -> SelectorSeries:
    """One scalar per time step, min-max normalized to [0, 1].

    Windows are [t - window//2, t + window//2], clamped to the valid
    step range.  `direct` averages the node centralities of each window
    sub-alignment; `diff` averages the per-node centrality change
    between the windows of t and t + 1 (absent nodes count as zero) and
    repeats the last defined value at the final step.
    """
    if measure not in _CENTRALITY:
        raise DataError(f"unknown measure '{measure}'")
    if mode not in MODES:
        raise DataError(f"unknown mode '{mode}'")
    if window < 1:
        raise DataError("window must be >= 1")
    steps = alignment.aligned_steps
    t_count = len(steps)
    if window > 2 * t_count:
        warnings.warn(
            f"window {window} spans more than twice the {t_count} steps, clamping",
            stacklevel=2,
        )
    centrality = _CENTRALITY[measure]
    half = window // 2
    lo_step, hi_step = steps[0], steps[-1]

    def window_steps(t: int) -> List[int]:
        return [s for s in steps if max(lo_step, t - half) <= s <= min(hi_step, t + half)]

    windows = {t: sub_alignment(alignment, window_steps(t)) for t in steps}
    scores = {t: centrality(windows[t]) for t in steps}

    raw: List[float] = []
    if mode == "direct":
        for t in steps:
            sc = scores[t]
            raw.append(sum(sc.values()) / len(sc))
    else:
        for i, t in enumerate(steps[:-1]):
            a, b = scores[t], scores[steps[i + 1]]
            union = set(a) | set(b)
            raw.append(sum(abs(a.get(n, 0.0) - b.get(n, 0.0)) for n in union) / len(union))
        raw.append(raw[-1] if raw else 0.0)

    lo, hi = min(raw), max(raw)
    if hi == lo:
        values = [0.5] * len(raw)
    else:
        values = [(v - lo) / (hi - lo) for v in raw]
    return SelectorSeries(measure=measure, mode=mode, window=window, values=values, raw=raw)


def series_points(series: SelectorSeries) -> List[Dict]:
    """Series as a list of {t, value, raw_value} records."""
    return [
        {"t": t, "value": v, "raw_value": r}
        for t, (v, r) in enumerate(zip(series.values, series.raw))
    ]
