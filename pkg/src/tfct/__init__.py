"""Fuzzy contour trees for time-varying 2D scalar fields.

The package is organised as a pipeline:

    dataset_io  - load/synthesise time series of 2D grids
    topology    - contour trees with segmentation and branch decomposition
    alignment   - sequential alignment of per-step trees into a supertree
    layout      - annealed branch layout, trickle-down and bundled geometry
    analysis    - centralities and time-selector series
    service     - HTTP/JSON API on top of a precomputed alignment
    cli         - command line entry points
"""

__version__ = "0.1.0"

from .dataset_io import DataError, ScalarGrid, TimeSeriesDataset, TotalOrder

__all__ = [
    "DataError",
    "ScalarGrid",
    "TimeSeriesDataset",
    "TotalOrder",
    "__version__",
]
