"""Geolocated report ingestion, trajectory fusion, and map emission."""

from .coverage import CoveragePolygon, coverage_polygons
from .geojson import (
    COLOR_TABLE_VERSION,
    LABEL_COLORS,
    color_of,
    dumps_geojson,
    emit_geojson,
    first_trajectory_coordinate,
)
from .html import DEFAULT_TILE_URL, render_html
from .reports import GroundReport, ReportStore, parse_report
from .server import build_map_document, create_app
from .trajectory import TrajectoryPoint, TrajectorySegment, fuse_trajectory, smooth_labels

__all__ = [
    "COLOR_TABLE_VERSION",
    "DEFAULT_TILE_URL",
    "LABEL_COLORS",
    "CoveragePolygon",
    "GroundReport",
    "ReportStore",
    "TrajectoryPoint",
    "TrajectorySegment",
    "build_map_document",
    "color_of",
    "coverage_polygons",
    "create_app",
    "dumps_geojson",
    "emit_geojson",
    "first_trajectory_coordinate",
    "fuse_trajectory",
    "parse_report",
    "render_html",
    "smooth_labels",
]
