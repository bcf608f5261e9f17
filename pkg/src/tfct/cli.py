"""tfct command line: synth, ingest, precompute, export, serve.

Exit codes: 0 on success, 2 on usage errors (argparse), 3 on data
errors like unreadable files or invalid parameters.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .alignment import MatchMetric, METRIC_KINDS, align_sequence
from .cache import (
    PrecomputedSession,
    dataset_digest,
    default_cache_dir,
    load_session,
    save_session,
)
from .dataset_io import (
    DataError,
    SYNTHETIC_KINDS,
    apply_mask,
    dataset_to_bytes,
    generate_synthetic,
    load_dataset,
    save_dataset,
    smooth,
    TimeSeriesDataset,
)
from .export import svg_document
from .layout import compute_layout
from .service import ApiError, DEFAULT_PORT, Session, create_app
from .topology import contour_tree


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tfct",
        description="Time-varying fuzzy contour trees",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"tfct {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser(
        "synth",
        help="generate a synthetic dataset",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    synth.add_argument("--kind", choices=SYNTHETIC_KINDS, default="two_peaks")
    synth.add_argument("--steps", type=int, default=12)
    synth.add_argument("--width", type=int, default=32)
    synth.add_argument("--height", type=int, default=32)
    synth.add_argument("--period", type=int, default=12, help="cycle length for periodic_blob")
    synth.add_argument("--out", required=True, help="output .tfts file")
    synth.set_defaults(func=cmd_synth)

    ingest = sub.add_parser(
        "ingest",
        help="normalize a dataset into the binary format",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    ingest.add_argument("--input", required=True)
    ingest.add_argument("--format", choices=("tfts", "csv_dir"), default="tfts")
    ingest.add_argument("--mask", help="CSV of 0/1 flags marking valid cells")
    ingest.add_argument("--fill", type=float, default=0.0, help="value for masked-out cells")
    ingest.add_argument("--smooth-passes", type=int, default=0)
    ingest.add_argument("--out", required=True, help="output .tfts file")
    ingest.set_defaults(func=cmd_ingest)

    pre = sub.add_parser(
        "precompute",
        help="build contour trees, alignment and layout, write the cache",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    pre.add_argument("--input", required=True)
    pre.add_argument("--format", choices=("tfts", "csv_dir"), default="tfts")
    pre.add_argument("--metric", choices=METRIC_KINDS, default="persistence")
    pre.add_argument("--weight", type=float, default=0.5, help="persistence share of the combined metric")
    pre.add_argument("--simplify", type=float, default=0.0, help="persistence threshold per step")
    pre.add_argument("--seed-step", type=int, default=0, help="time step the alignment starts from")
    pre.add_argument("--layout-seed", type=int, default=42)
    pre.add_argument("--out", help="cache file (default: <cache dir>/<input stem>.tfca)")
    pre.set_defaults(func=cmd_precompute)

    exp = sub.add_parser(
        "export",
        help="write selection geometry as JSON or SVG",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    exp.add_argument("--cache", required=True)
    exp.add_argument("--out", required=True)
    exp.add_argument("--fmt", choices=("json", "svg"), default="json")
    exp.add_argument("--mode", choices=("window", "multi", "periodic"), default="window")
    exp.add_argument("--center", type=int, help="window center (default: middle step)")
    exp.add_argument("--width", type=int, default=5, help="window width")
    exp.add_argument("--steps", help="comma-separated steps for multi mode")
    exp.add_argument("--anchor", type=int, default=0, help="periodic anchor step")
    exp.add_argument("--period", type=int, help="periodic cycle length")
    exp.add_argument("--compact-gaps", action="store_true")
    exp.add_argument("--equal-spacing", action="store_true")
    exp.set_defaults(func=cmd_export)

    srv = sub.add_parser(
        "serve",
        help="serve a precomputed session over HTTP",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    srv.add_argument("--cache", required=True)
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=DEFAULT_PORT)
    srv.set_defaults(func=cmd_serve)

    return parser


def cmd_synth(args) -> int:
    dataset = generate_synthetic(args.kind, args.steps, args.width, args.height, args.period)
    save_dataset(dataset, args.out)
    print(f"wrote {args.out}: {args.kind}, {len(dataset)} steps of {dataset.width}x{dataset.height}")
    return 0


def cmd_ingest(args) -> int:
    dataset = load_dataset(args.input, args.format)
    grids = dataset.grids
    if args.mask:
        try:
            mask = np.loadtxt(args.mask, delimiter=",")
        except (OSError, ValueError) as exc:
            raise DataError(f"cannot read mask {args.mask}: {exc}") from exc
        grids = [apply_mask(g, mask, args.fill) for g in grids]
    if args.smooth_passes:
        grids = [smooth(g, args.smooth_passes) for g in grids]
    out = TimeSeriesDataset(grids, labels=dataset.labels)
    save_dataset(out, args.out)
    print(f"wrote {args.out}: {len(out)} steps of {out.width}x{out.height}")
    return 0


def cmd_precompute(args) -> int:
    dataset = load_dataset(args.input, args.format)
    metric = MatchMetric(args.metric, args.weight)
    if not 0 <= args.seed_step < len(dataset):
        raise DataError(f"seed step {args.seed_step} outside 0..{len(dataset) - 1}")
    trees = [contour_tree(g, simplify_threshold=args.simplify) for g in dataset.grids]
    alignment = align_sequence(trees, metric, first=args.seed_step)
    overall = compute_layout(alignment, seed=args.layout_seed)
    session = PrecomputedSession(
        alignment=alignment,
        layout=overall,
        labels=dataset.labels,
        width=dataset.width,
        height=dataset.height,
        dataset_sha=dataset_digest(dataset_to_bytes(dataset)),
        metric=metric,
        seed_step=args.seed_step,
        layout_seed=args.layout_seed,
    )
    out = args.out
    if out is None:
        out = default_cache_dir() / (Path(args.input).stem + ".tfca")
    save_session(session, out)
    print(
        f"cache={out} steps={len(dataset)} nodes={len(alignment.nodes)} "
        f"branches={len(overall.branches)} layout_cost={overall.cost:.4f}"
    )
    return 0


def _export_params(args, steps: int) -> tuple:
    if args.mode == "window":
        center = args.center if args.center is not None else (steps - 1) // 2
        return "window", {"center": center, "width": args.width}
    if args.mode == "multi":
        if not args.steps:
            raise DataError("multi mode needs --steps")
        try:
            chosen = [int(s) for s in args.steps.split(",") if s.strip() != ""]
        except ValueError as exc:
            raise DataError(f"bad --steps list: {exc}") from exc
        return "multi", {"steps": chosen}
    if args.period is None:
        raise DataError("periodic mode needs --period")
    return "periodic", {"anchor": args.anchor, "period": args.period}


def cmd_export(args) -> int:
    session = Session(load_session(args.cache))
    mode, params = _export_params(args, session.steps)
    try:
        session.set_selection(mode, params, args.compact_gaps, args.equal_spacing)
    except ApiError as exc:
        raise DataError(exc.message) from exc
    payload_bytes = session.geometry_bytes()
    out = Path(args.out)
    if args.fmt == "json":
        out.write_bytes(payload_bytes)
    else:
        out.write_text(svg_document(json.loads(payload_bytes)))
    print(f"wrote {out}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    session = Session(load_session(args.cache))
    app = create_app(session)
    print(f"serving {args.cache} on http://{args.host}:{args.port}")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
