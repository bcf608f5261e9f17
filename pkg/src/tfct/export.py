"""Selection geometry assembly and export encodings.

The service and the CLI share one payload builder so an exported file
is byte-identical to the corresponding HTTP response.  JSON uses sorted
keys and compact separators; the SVG embeds the same coordinate floats
through their repr, inside a transformed group, so the two formats
agree digit for digit.
"""

from __future__ import annotations

import json
from typing import Dict, List, Optional

from .alignment import AlignmentTree, sub_alignment
from .layout import (
    Layout,
    bundle,
    optimized_branch_spacing,
    transfer_to_member,
    trickle_down,
)


def canonical_json_bytes(payload) -> bytes:
    return json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")


def build_selection_geometry(
    alignment: AlignmentTree,
    overall: Layout,
    selection: Dict,
    compact_gaps: bool = False,
    equal_spacing: bool = False,
) -> Dict:
    """Everything the client needs to draw one selection.

    `selection` carries mode/params/members; members drive the geometry.
    """
    members: List[int] = list(selection["members"])
    sub = sub_alignment(alignment, members)
    sub_layout = trickle_down(overall, sub, compact_gaps=compact_gaps)
    if equal_spacing:
        sub_layout = optimized_branch_spacing(sub_layout)
    bundled = bundle(sub, sub_layout)

    branches = []
    for key in sorted(sub_layout.branches):
        b = sub_layout.branches[key]
        branches.append(
            {
                "id": key,
                "parent": b.parent_key,
                "x": b.x,
                "side": b.side,
                "order_key": b.order_key,
                "present_at": list(b.members),
            }
        )
    nodes = []
    for nid in sorted(sub.nodes):
        node = sub.nodes[nid]
        nodes.append(
            {
                "id": nid,
                "parent": sub.parent[nid],
                "x": sub_layout.node_x[nid],
                "y": sub_layout.node_y[nid],
                "value": node.value,
                "frequency": node.frequency,
                "color_key": node.color_key,
                "color": bundled.leaf_colors.get(nid),
                "members": sorted(node.members),
                "branch": sub_layout.node_branch[nid],
            }
        )
    edges = []
    for e in bundled.edges:
        edges.append(
            {
                "child": e.child,
                "parent": e.parent,
                "frequency": e.frequency,
                "opacity": e.opacity,
                "points": [[p[0], p[1]] for p in e.points],
                "members": list(e.members),
            }
        )
    member_layouts = []
    for t in members:
        ml = transfer_to_member(sub_layout, sub, t)
        member_layouts.append(
            {
                "t": t,
                "nodes": [
                    {
                        "id": p.alignment_id,
                        "member": p.member_node_id,
                        "x": p.x,
                        "y": p.y,
                        "value": p.value,
                        "kind": p.kind,
                    }
                    for p in ml.nodes
                ],
                "edges": [
                    {
                        "child": e.child,
                        "parent": e.parent,
                        "points": [[p[0], p[1]] for p in e.points],
                    }
                    for e in ml.edges
                ],
            }
        )
    return {
        "selection": {
            "mode": selection["mode"],
            "params": selection["params"],
            "members": members,
            "compact_gaps": compact_gaps,
            "equal_spacing": equal_spacing,
        },
        "value_range": [alignment.value_range[0], alignment.value_range[1]],
        "branches": branches,
        "nodes": nodes,
        "edges": edges,
        "members": member_layouts,
    }


def member_geometry(payload: Dict, t: int) -> Optional[Dict]:
    for entry in payload["members"]:
        if entry["t"] == t:
            return entry
    return None


# ---------------------------------------------------------------------------
# SVG
# ---------------------------------------------------------------------------

_SVG_HEADER = (
    '<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
    'viewBox="0 0 {w} {h}">\n'
)


def svg_document(payload: Dict, width: int = 960, height: int = 600) -> str:
    """Render a selection payload as a standalone SVG string.

    Geometry coordinates are written verbatim (their repr, matching the
    JSON payload exactly) and mapped to pixels by a group transform, so
    strokes use non-scaling widths.
    """
    xs = [n["x"] for n in payload["nodes"]] or [0.0]
    pad = 0.75
    x_lo, x_hi = min(xs) - pad, max(xs) + pad
    span = max(x_hi - x_lo, 1e-9)
    sx = (width - 40) / span
    sy = height - 40
    transform = (
        f"translate({20 - x_lo * sx!r},{height - 20!r}) scale({sx!r},{-sy!r})"
    )
    out = [_SVG_HEADER.format(w=width, h=height)]
    out.append(f'<g transform="{transform}">\n')
    for e in payload["edges"]:
        (x0, y0), (cx, cy), (x1, y1) = e["points"]
        out.append(
            f'<path d="M {x0!r} {y0!r} Q {cx!r} {cy!r} {x1!r} {y1!r}" '
            f'fill="none" stroke="#444444" stroke-opacity="{e["opacity"]!r}" '
            'stroke-width="2" vector-effect="non-scaling-stroke"/>\n'
        )
    for entry in payload["members"]:
        for e in entry["edges"]:
            pts = " ".join(f"{p[0]!r},{p[1]!r}" for p in e["points"])
            out.append(
                f'<polyline points="{pts}" fill="none" stroke="#99ccee" '
                'stroke-width="1" vector-effect="non-scaling-stroke"/>\n'
            )
    out.append("</g>\n")
    # circles drawn in pixel space so the radius stays readable
    for n in payload["nodes"]:
        color = n["color"] or "#333333"
        px = 20 - x_lo * sx + n["x"] * sx
        py = (height - 20) - n["y"] * sy
        out.append(
            f'<circle cx="{px!r}" cy="{py!r}" r="4" fill="{color}" fill-opacity="0.9">'
            f'<title>node {n["id"]} value {n["value"]!r}</title></circle>\n'
        )
    out.append("</svg>\n")
    return "".join(out)
