"""Render figures from ringload simulation CSV files."""

from .figures import (
    DIST_HEADER,
    KINDS,
    RESULTS_HEADER,
    SchemaError,
    build_figure,
    read_distribution,
    read_results,
    render,
)

__all__ = [
    "DIST_HEADER",
    "KINDS",
    "RESULTS_HEADER",
    "SchemaError",
    "build_figure",
    "read_distribution",
    "read_results",
    "render",
]

__version__ = "0.1.0"
