"""Time series of 2D scalar grids: loading, preprocessing and synthesis.

A dataset is an ordered sequence of equally sized grids, one per time
step.  Downstream topology code needs a strict total order on the sample
values of a grid, so ties between equal values are broken by vertex
index (symbolic perturbation).  Vertices are addressed row-major,
``v = y * width + x``.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

TFTS_MAGIC = b"TFTS"
TFTS_VERSION = 1

SYNTHETIC_KINDS = ("moving_gaussian", "periodic_blob", "two_peaks")


class DataError(ValueError):
    """Malformed or inconsistent input data."""


# ---------------------------------------------------------------------------
# core types
# ---------------------------------------------------------------------------


@dataclass
class ScalarGrid:
    """A single 2D scalar field stored as a flat float64 array."""

    width: int
    height: int
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.width < 2 or self.height < 2:
            raise DataError(
                f"grid must be at least 2x2, got {self.width}x{self.height}"
            )
        self.values = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if self.values.size != self.width * self.height:
            raise DataError(
                f"expected {self.width * self.height} samples, got {self.values.size}"
            )
        if not np.all(np.isfinite(self.values)):
            raise DataError("grid contains non-finite values")

    @property
    def size(self) -> int:
        return self.width * self.height

    def as_rows(self) -> np.ndarray:
        """Return a (height, width) view of the samples."""
        return self.values.reshape(self.height, self.width)

    def value(self, vertex: int) -> float:
        return float(self.values[vertex])

    def is_constant(self) -> bool:
        return bool(np.all(self.values == self.values[0]))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ScalarGrid):
            return NotImplemented
        return (
            self.width == other.width
            and self.height == other.height
            and np.array_equal(self.values, other.values)
        )


@dataclass(frozen=True)
class TotalOrder:
    """Strict total order on the vertices of one grid.

    Vertices compare by (value, vertex index), so no two distinct
    vertices are ever equal even on plateaus.
    """

    values: np.ndarray

    def key(self, vertex: int):
        return (float(self.values[vertex]), int(vertex))

    def less(self, u: int, v: int) -> bool:
        a, b = self.values[u], self.values[v]
        if a != b:
            return bool(a < b)
        return u < v

    def sorted_vertices(self, descending: bool = False) -> np.ndarray:
        """All vertex indices, ascending (or descending) in the order.

        Descending is the exact reverse of ascending: on plateaus the
        higher vertex index counts as the higher vertex, both ways.
        """
        order = np.argsort(self.values, kind="stable")
        if descending:
            order = order[::-1]
        return order

    def ranks(self) -> np.ndarray:
        """rank[v] = position of v in the ascending order."""
        order = self.sorted_vertices()
        ranks = np.empty(len(order), dtype=np.int64)
        ranks[order] = np.arange(len(order))
        return ranks


class TimeSeriesDataset:
    """An ordered list of grids sharing one width/height."""

    def __init__(self, grids: Sequence[ScalarGrid], labels: Optional[Sequence[str]] = None):
        if len(grids) == 0:
            raise DataError("dataset has no time steps")
        w, h = grids[0].width, grids[0].height
        for i, g in enumerate(grids):
            if g.width != w or g.height != h:
                raise DataError(
                    f"step {i} has shape {g.width}x{g.height}, expected {w}x{h}"
                )
        if labels is None:
            labels = [f"t{i}" for i in range(len(grids))]
        if len(labels) != len(grids):
            raise DataError("one label per time step required")
        self.grids: List[ScalarGrid] = list(grids)
        self.labels: List[str] = [str(l) for l in labels]
        self.width = w
        self.height = h
        self.global_min = float(min(g.values.min() for g in grids))
        self.global_max = float(max(g.values.max() for g in grids))

    def __len__(self) -> int:
        return len(self.grids)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TimeSeriesDataset):
            return NotImplemented
        return (
            self.labels == other.labels
            and len(self.grids) == len(other.grids)
            and all(a == b for a, b in zip(self.grids, other.grids))
        )


# ---------------------------------------------------------------------------
# file formats
# ---------------------------------------------------------------------------


def dataset_to_bytes(dataset: TimeSeriesDataset) -> bytes:
    """Serialize to the binary time-series format.

    Header: magic "TFTS", u32 version, u32 steps, u32 width, u32 height,
    all little-endian, followed by steps*width*height little-endian
    float64 samples, row-major, time-major.  Labels are not stored.
    """
    parts = [
        TFTS_MAGIC,
        struct.pack("<IIII", TFTS_VERSION, len(dataset), dataset.width, dataset.height),
    ]
    for grid in dataset.grids:
        parts.append(grid.values.astype("<f8").tobytes())
    return b"".join(parts)


def save_dataset(dataset: TimeSeriesDataset, path) -> None:
    """Write the binary time-series format to a file."""
    Path(path).write_bytes(dataset_to_bytes(dataset))


def _load_tfts(path: Path) -> TimeSeriesDataset:
    blob = path.read_bytes()
    if len(blob) < 20 or blob[:4] != TFTS_MAGIC:
        raise DataError(f"{path}: not a TFTS file")
    version, steps, width, height = struct.unpack("<IIII", blob[4:20])
    if version != TFTS_VERSION:
        raise DataError(f"{path}: unsupported TFTS version {version}")
    if steps == 0:
        raise DataError(f"{path}: dataset has no time steps")
    expected = 20 + steps * width * height * 8
    if len(blob) != expected:
        raise DataError(f"{path}: expected {expected} bytes, found {len(blob)}")
    samples = np.frombuffer(blob, dtype="<f8", offset=20)
    per_step = width * height
    grids = [
        ScalarGrid(width, height, samples[i * per_step : (i + 1) * per_step].copy())
        for i in range(steps)
    ]
    return TimeSeriesDataset(grids)


def _load_csv_dir(path: Path) -> TimeSeriesDataset:
    files = sorted(path.glob("t*.csv"), key=_csv_step_index)
    if not files:
        raise DataError(f"{path}: no t<index>.csv files found")
    indices = [_csv_step_index(f) for f in files]
    if indices != list(range(len(files))):
        raise DataError(f"{path}: step files must be t0.csv .. t{len(files) - 1}.csv")
    grids = []
    for f in files:
        rows = []
        for line in f.read_text().splitlines():
            line = line.strip()
            if not line:
                continue
            try:
                rows.append([float(cell) for cell in line.split(",")])
            except ValueError as exc:
                raise DataError(f"{f}: {exc}") from exc
        if not rows:
            raise DataError(f"{f}: empty grid")
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise DataError(f"{f}: ragged rows")
        grids.append(ScalarGrid(width, len(rows), np.array(rows, dtype=np.float64)))
    return TimeSeriesDataset(grids, labels=[f.stem for f in files])


def _csv_step_index(path: Path) -> int:
    stem = path.stem
    try:
        return int(stem[1:])
    except ValueError as exc:
        raise DataError(f"{path}: cannot parse step index from '{stem}'") from exc


def load_dataset(path, format: str) -> TimeSeriesDataset:
    """Load a dataset from a TFTS file or a directory of t<index>.csv files."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path}: no such file or directory")
    if format == "tfts":
        return _load_tfts(path)
    if format == "csv_dir":
        return _load_csv_dir(path)
    raise DataError(f"unknown dataset format '{format}'")


# ---------------------------------------------------------------------------
# preprocessing
# ---------------------------------------------------------------------------


def smooth(grid: ScalarGrid, passes: int = 1) -> ScalarGrid:
    """Box-filter the grid with a 3x3 kernel.

    Border cells average over their existing neighbors only, so the
    output range never exceeds the input range.  `passes` repeats the
    filter; 0 passes returns an identical copy.
    """
    if passes < 0:
        raise DataError("smoothing passes must be >= 0")
    rows = grid.as_rows().copy()
    for _ in range(passes):
        padded = np.full((rows.shape[0] + 2, rows.shape[1] + 2), np.nan)
        padded[1:-1, 1:-1] = rows
        acc = np.zeros_like(rows)
        cnt = np.zeros_like(rows)
        for dy in (0, 1, 2):
            for dx in (0, 1, 2):
                window = padded[dy : dy + rows.shape[0], dx : dx + rows.shape[1]]
                valid = ~np.isnan(window)
                acc[valid] += window[valid]
                cnt[valid] += 1
        rows = acc / cnt
    return ScalarGrid(grid.width, grid.height, rows)


def apply_mask(grid: ScalarGrid, mask: np.ndarray, fill_value: float) -> ScalarGrid:
    """Replace samples where `mask` is False with `fill_value`.

    The mask marks valid cells; invalid cells get the fill value (for
    instance -1 on data that only exists over part of the domain).
    """
    mask = np.asarray(mask).reshape(-1).astype(bool)
    if mask.size != grid.size:
        raise DataError(f"mask has {mask.size} cells, grid has {grid.size}")
    values = grid.values.copy()
    values[~mask] = fill_value
    return ScalarGrid(grid.width, grid.height, values)


# ---------------------------------------------------------------------------
# synthetic datasets
# ---------------------------------------------------------------------------


def _gauss(xs: np.ndarray, ys: np.ndarray, cx: float, cy: float, sigma: float) -> np.ndarray:
    return np.exp(-((xs - cx) ** 2 + (ys - cy) ** 2) / (2.0 * sigma * sigma))


def _unit_coords(width: int, height: int):
    xs, ys = np.meshgrid(
        np.linspace(0.0, 1.0, width), np.linspace(0.0, 1.0, height)
    )
    return xs, ys


def generate_synthetic(
    kind: str, steps: int, width: int, height: int, period: int = 12
) -> TimeSeriesDataset:
    """Deterministic analytic test datasets.

    moving_gaussian: one peak wandering left to right.
    periodic_blob:   a fixed primary peak plus a secondary peak that
                     exists exactly at steps with t mod period < period/2.
    two_peaks:       a static field with exactly two strict local maxima.

    All three sit on a shallow slope falling away from the origin corner,
    which pins the global minimum to the far corner without adding
    spurious extrema.
    """
    if kind not in SYNTHETIC_KINDS:
        raise DataError(f"unknown synthetic dataset '{kind}'")
    if steps < 1:
        raise DataError("steps must be >= 1")
    if period < 2:
        raise DataError("period must be >= 2")
    xs, ys = _unit_coords(width, height)
    base = -0.5 * (xs * xs + ys * ys)
    grids = []
    for t in range(steps):
        if kind == "moving_gaussian":
            frac = t / max(steps - 1, 1)
            cx = 0.15 + 0.7 * frac
            field = base + 2.0 * _gauss(xs, ys, cx, 0.5, 0.18)
        elif kind == "periodic_blob":
            field = base + 2.0 * _gauss(xs, ys, 0.3, 0.5, 0.18)
            if (t % period) < period / 2:
                field = field + 1.2 * _gauss(xs, ys, 0.72, 0.5, 0.12)
        else:  # two_peaks
            field = base + 2.0 * _gauss(xs, ys, 0.3, 0.5, 0.18)
            field = field + 1.2 * _gauss(xs, ys, 0.72, 0.5, 0.12)
        grids.append(ScalarGrid(width, height, field))
    return TimeSeriesDataset(grids)
