"""GeoJSON emission with a fixed, versioned label-to-color table."""

from __future__ import annotations

import json

from ..errors import EmptyDocument
from ..materials import MATERIAL_NAMES
from .coverage import CoveragePolygon
from .trajectory import TrajectorySegment

# Fixed palette, one entry per taxonomy slot, keyed by canonical name.
# Versioned here so that renders are reproducible across deployments.
COLOR_TABLE_VERSION = 1
LABEL_COLORS: dict[str, str] = {
    "carpet": "#e6194b",
    "carpet-red": "#3cb44b",
    "carpet-color": "#ffe119",
    "mat": "#4363d8",
    "sand": "#f58231",
    "gravel-small": "#911eb4",
    "gravel-mid": "#46f0f0",
    "gravel-large": "#f032e6",
    "tile": "#bcf60c",
    "plastic": "#fabebe",
    "wood": "#008080",
    "rubber": "#e6beff",
    "soil": "#9a6324",
    "asphalt": "#fffac8",
    "concrete": "#800000",
    "slab": "#aaffc3",
    "brick": "#808000",
    "grass": "#ffd8b1",
}
assert set(LABEL_COLORS) == set(MATERIAL_NAMES)


def color_of(label: str) -> str:
    return LABEL_COLORS[label]


def emit_geojson(
    segments: list[TrajectorySegment],
    polygons: list[CoveragePolygon],
) -> dict:
    """Build a FeatureCollection of trajectory lines, coverage polygons,
    and per-client start/end markers.

    Coordinates follow the GeoJSON order (lon, lat) and are emitted at
    full float precision so they round-trip exactly.
    """
    features: list[dict] = []
    for poly in polygons:
        features.append(
            {
                "type": "Feature",
                "geometry": {
                    "type": "Polygon",
                    "coordinates": [[[lon, lat] for lat, lon in poly.ring]],
                },
                "properties": {
                    "kind": "coverage",
                    "label": poly.label,
                    "color": color_of(poly.label),
                },
            }
        )
    by_client: dict[str, list[TrajectorySegment]] = {}
    for seg in segments:
        by_client.setdefault(seg.client_id, []).append(seg)
        coords = [[p.lon, p.lat] for p in seg.points]
        if len(coords) == 1:
            coords = coords * 2  # LineString needs two positions
        features.append(
            {
                "type": "Feature",
                "geometry": {
                    "type": "LineString",
                    "coordinates": coords,
                },
                "properties": {
                    "kind": "trajectory",
                    "label": seg.label,
                    "color": color_of(seg.label),
                    "client_id": seg.client_id,
                    "t_start_ms": seg.points[0].timestamp_ms,
                    "t_end_ms": seg.points[-1].timestamp_ms,
                },
            }
        )
    for client_id in sorted(by_client):
        segs = by_client[client_id]
        first = segs[0].points[0]
        last = segs[-1].points[-1]
        for role, point in (("start", first), ("end", last)):
            features.append(
                {
                    "type": "Feature",
                    "geometry": {"type": "Point", "coordinates": [point.lon, point.lat]},
                    "properties": {"kind": f"{role}-marker", "client_id": client_id},
                }
            )
    return {
        "type": "FeatureCollection",
        "features": features,
        "properties": {"color_table_version": COLOR_TABLE_VERSION},
    }


def dumps_geojson(doc: dict) -> str:
    """Deterministic serialization: identical documents yield identical bytes."""
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def first_trajectory_coordinate(doc: dict) -> tuple[float, float]:
    """(lat, lon) of the first trajectory point; raises EmptyDocument."""
    for feature in doc.get("features", []):
        if feature["properties"].get("kind") == "trajectory":
            lon, lat = feature["geometry"]["coordinates"][0]
            return lat, lon
    raise EmptyDocument("document has no trajectory features")
