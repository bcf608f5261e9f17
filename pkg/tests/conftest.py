from __future__ import annotations

import pytest

from tfct.alignment import MatchMetric, align_sequence
from tfct.cache import PrecomputedSession, dataset_digest
from tfct.dataset_io import dataset_to_bytes, generate_synthetic
from tfct.layout import compute_layout
from tfct.topology import contour_tree

PERIOD = 12
PERIODIC_STEPS = 24
PEAK_STEPS = frozenset(t for t in range(PERIODIC_STEPS) if t % PERIOD < PERIOD // 2)

ACCEPTANCE_VERDICTS: list = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    # surface the acceptance verdicts even under captured output
    if ACCEPTANCE_VERDICTS:
        terminalreporter.section("acceptance")
        for line in ACCEPTANCE_VERDICTS:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def periodic_dataset():
    return generate_synthetic("periodic_blob", PERIODIC_STEPS, 32, 32, PERIOD)


@pytest.fixture(scope="session")
def periodic_trees(periodic_dataset):
    return [contour_tree(g) for g in periodic_dataset.grids]


@pytest.fixture(scope="session")
def periodic_alignment(periodic_trees):
    # session scoped: tests must not mutate it (no update_alignment_values)
    return align_sequence(periodic_trees, MatchMetric(kind="overlap"))


@pytest.fixture(scope="session")
def periodic_layout(periodic_alignment):
    return compute_layout(periodic_alignment, seed=42)


@pytest.fixture(scope="session")
def periodic_precomputed(periodic_dataset, periodic_alignment, periodic_layout):
    return PrecomputedSession(
        alignment=periodic_alignment,
        layout=periodic_layout,
        labels=list(periodic_dataset.labels),
        width=periodic_dataset.width,
        height=periodic_dataset.height,
        dataset_sha=dataset_digest(dataset_to_bytes(periodic_dataset)),
        metric=MatchMetric(kind="overlap"),
        seed_step=0,
        layout_seed=42,
    )


@pytest.fixture(scope="session")
def static_dataset():
    # two_peaks is time independent, so all 16 steps are identical
    return generate_synthetic("two_peaks", 16, 16, 16)


@pytest.fixture(scope="session")
def static_precomputed(static_dataset):
    trees = [contour_tree(g) for g in static_dataset.grids]
    alignment = align_sequence(trees, MatchMetric(kind="volume"))
    layout = compute_layout(alignment, seed=42)
    return PrecomputedSession(
        alignment=alignment,
        layout=layout,
        labels=list(static_dataset.labels),
        width=static_dataset.width,
        height=static_dataset.height,
        dataset_sha=dataset_digest(dataset_to_bytes(static_dataset)),
        metric=MatchMetric(kind="volume"),
        seed_step=0,
        layout_seed=42,
    )
