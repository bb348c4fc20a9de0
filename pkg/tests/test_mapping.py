"""Trajectory fusion, coverage geometry, GeoJSON, report store, HTML render."""

import itertools
import json
import math
import threading

import numpy as np
import pytest

from vibmap.errors import (
    EmptyInput,
    MalformedReport,
    OutOfRangeCoordinate,
    UnknownLabel,
)
from vibmap.mapping.coverage import coverage_polygons
from vibmap.mapping.geojson import (
    LABEL_COLORS,
    dumps_geojson,
    emit_geojson,
    first_trajectory_coordinate,
)
from vibmap.mapping.html import render_html
from vibmap.mapping.reports import GroundReport, ReportStore, parse_report
from vibmap.mapping.trajectory import fuse_trajectory, smooth_labels
from vibmap.materials import MATERIAL_NAMES

BASE = dict(lat=22.59, lon=113.97)


def _report(client="A", seq=1, label="carpet", lat=None, lon=None, t=None):
    return GroundReport(
        client_id=client,
        seq=seq,
        timestamp_ms=t if t is not None else seq * 1000,
        lat=lat if lat is not None else BASE["lat"] + seq * 1e-5,
        lon=lon if lon is not None else BASE["lon"] + seq * 1e-5,
        label=label,
        confidence=0.9,
    )


def _reports_for_labels(labels, client="A"):
    return [_report(client, i + 1, lab) for i, lab in enumerate(labels)]


# --- smoothing / segmentation ------------------------------------------------

def smooth_oracle(labels, k):
    """Brute-force majority window with keep-prior tie breaking."""
    out = []
    half = (k - 1) // 2
    for i in range(len(labels)):
        window = labels[max(0, i - half) : min(len(labels), i + (k - half))]
        counts = {}
        for lab in window:
            counts[lab] = counts.get(lab, 0) + 1
        best = max(counts.values())
        winners = [lab for lab, c in counts.items() if c == best]
        if len(winners) == 1:
            out.append(winners[0])
        else:
            out.append(out[-1] if out else labels[i])
    return out


def rle(labels):
    return [lab for lab, _ in itertools.groupby(labels)]


def test_k1_equals_run_length_encoding(rng):
    alphabet = ["carpet", "sand", "tile"]
    for _ in range(500):
        labels = [alphabet[i] for i in rng.integers(0, 3, size=rng.integers(1, 30))]
        segs = fuse_trajectory(_reports_for_labels(labels), smoothing_k=1)
        assert [s.label for s in segs] == rle(labels)


def test_k3_matches_bruteforce_oracle(rng):
    alphabet = ["carpet", "sand", "tile", "wood"]
    for _ in range(300):
        labels = [alphabet[i] for i in rng.integers(0, 4, size=rng.integers(1, 40))]
        assert smooth_labels(labels, 3) == smooth_oracle(labels, 3)


def test_simple_run_split_with_transition_point():
    # [A,A,A,B,B] with k=1: segment A carries B's first point as its close
    labels = ["carpet"] * 3 + ["sand"] * 2
    reports = _reports_for_labels(labels)
    segs = fuse_trajectory(reports, smoothing_k=1)
    assert [s.label for s in segs] == ["carpet", "sand"]
    assert len(segs[0].points) == 4
    assert len(segs[1].points) == 2
    shared = segs[0].points[-1]
    assert (shared.lat, shared.lon) == (reports[3].lat, reports[3].lon)
    assert (segs[1].points[0].lat, segs[1].points[0].lon) == (shared.lat, shared.lon)


def test_isolated_label_smoothed_away():
    labels = ["carpet", "carpet", "sand", "carpet", "carpet"]
    segs = fuse_trajectory(_reports_for_labels(labels), smoothing_k=3)
    assert len(segs) == 1
    assert segs[0].label == "carpet"
    assert len(segs[0].points) == 5


def test_single_report_single_segment():
    segs = fuse_trajectory([_report()], smoothing_k=3)
    assert len(segs) == 1
    assert len(segs[0].points) == 1


def test_point_conservation(rng):
    alphabet = ["carpet", "sand", "tile"]
    for _ in range(100):
        labels = [alphabet[i] for i in rng.integers(0, 3, size=rng.integers(1, 25))]
        segs = fuse_trajectory(_reports_for_labels(labels), smoothing_k=1)
        total = sum(len(s.points) for s in segs)
        assert total == len(labels) + (len(segs) - 1)


def test_fuse_empty_raises():
    with pytest.raises(EmptyInput):
        fuse_trajectory([], smoothing_k=3)


# --- coverage polygons --------------------------------------------------------

def _meters_to_deg_lat(m):
    return m / 6371008.8 * 180 / math.pi


def _meters_to_deg_lon(m, lat):
    return m / (6371008.8 * math.cos(math.radians(lat))) * 180 / math.pi


def _ring_area_m2(ring, lat0):
    """Shoelace area of a (lat, lon) ring in square meters (signed)."""
    pts = [
        (
            math.radians(lon) * 6371008.8 * math.cos(math.radians(lat0)),
            math.radians(lat) * 6371008.8,
        )
        for lat, lon in ring
    ]
    acc = 0.0
    for (x1, y1), (x2, y2) in zip(pts, pts[1:]):
        acc += x1 * y2 - x2 * y1
    return acc / 2.0


def _edges(ring):
    return list(zip(ring[:-1], ring[1:]))


def _segments_intersect(a, b, c, d):
    def cross(o, p, q):
        return (p[0] - o[0]) * (q[1] - o[1]) - (p[1] - o[1]) * (q[0] - o[0])

    d1, d2 = cross(c, d, a), cross(c, d, b)
    d3, d4 = cross(a, b, c), cross(a, b, d)
    return ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0))


def test_single_point_buffer_is_32gon():
    polys = coverage_polygons([_report()], radius_m=5.0)
    assert len(polys) == 1
    ring = polys[0].ring
    assert ring[0] == ring[-1]
    assert len(ring) - 1 == 32
    # every vertex ~5 m from the center
    lat0, lon0 = _report().lat, _report().lon
    for lat, lon in ring[:-1]:
        dx = math.radians(lon - lon0) * 6371008.8 * math.cos(math.radians(lat0))
        dy = math.radians(lat - lat0) * 6371008.8
        assert math.hypot(dx, dy) == pytest.approx(5.0, rel=0.01)


def test_two_close_points_merge_to_one_polygon():
    lat = BASE["lat"]
    r1 = _report(seq=1, lat=lat, lon=BASE["lon"])
    r2 = _report(seq=2, lat=lat + _meters_to_deg_lat(4.0), lon=BASE["lon"])
    polys = coverage_polygons([r1, r2], radius_m=5.0)
    assert len(polys) == 1
    # analytic union area of two r=5 circles 4 m apart
    r, d = 5.0, 4.0
    lens = 2 * r * r * math.acos(d / (2 * r)) - (d / 2) * math.sqrt(4 * r * r - d * d)
    expected = 2 * math.pi * r * r - lens
    got = abs(_ring_area_m2(polys[0].ring, lat))
    assert got == pytest.approx(expected, rel=0.03)  # 32-gon flattens the arc


def test_far_points_two_polygons_one_label():
    r1 = _report(seq=1, lat=BASE["lat"], lon=BASE["lon"])
    r2 = _report(seq=2, lat=BASE["lat"] + _meters_to_deg_lat(50.0), lon=BASE["lon"])
    polys = coverage_polygons([r1, r2], radius_m=5.0)
    assert len(polys) == 2


def test_labels_partition_polygons():
    r1 = _report(seq=1, label="carpet")
    r2 = _report(seq=2, label="sand", lat=r1.lat + _meters_to_deg_lat(3.0), lon=r1.lon)
    polys = coverage_polygons([r1, r2], radius_m=5.0)
    assert sorted(p.label for p in polys) == ["carpet", "sand"]


def test_rings_ccw_closed_simple(rng):
    reports = [
        _report(seq=i + 1, lat=BASE["lat"] + _meters_to_deg_lat(float(dy)),
                lon=BASE["lon"] + _meters_to_deg_lon(float(dx), BASE["lat"]))
        for i, (dx, dy) in enumerate(rng.uniform(-12, 12, size=(12, 2)))
    ]
    for poly in coverage_polygons(reports, radius_m=5.0):
        ring = poly.ring
        assert ring[0] == ring[-1]
        assert _ring_area_m2(ring, BASE["lat"]) > 0  # counter-clockwise
        edges = _edges(ring)
        for (a, b), (c, d) in itertools.combinations(edges, 2):
            if a in (c, d) or b in (c, d):
                continue  # adjacent edges share a vertex
            assert not _segments_intersect(a, b, c, d)


def test_coverage_empty_raises():
    with pytest.raises(EmptyInput):
        coverage_polygons([], radius_m=5.0)


# --- geojson ------------------------------------------------------------------

def _doc_two_segments_one_polygon():
    labels = ["carpet"] * 3 + ["sand"] * 2
    reports = _reports_for_labels(labels)
    segments = fuse_trajectory(reports, smoothing_k=1)
    polygons = coverage_polygons(reports[:1], radius_m=5.0)
    return emit_geojson(segments, polygons), reports


def test_feature_count_example():
    doc, _ = _doc_two_segments_one_polygon()
    # 2 LineStrings + 1 Polygon + start/end markers = 5
    assert doc["type"] == "FeatureCollection"
    assert len(doc["features"]) == 5
    kinds = sorted(f["properties"]["kind"] for f in doc["features"])
    assert kinds == ["coverage", "end-marker", "start-marker", "trajectory", "trajectory"]


def test_geojson_schema_validation():
    import jsonschema

    schema = json.loads(GEOJSON_SCHEMA)
    doc, _ = _doc_two_segments_one_polygon()
    jsonschema.validate(doc, schema)


def test_coordinate_precision_roundtrip():
    doc, reports = _doc_two_segments_one_polygon()
    text = dumps_geojson(doc)
    back = json.loads(text)
    coords = back["features"][1]["geometry"]["coordinates"]
    assert coords[0][1] == reports[0].lat  # exact float round-trip
    assert coords[0][0] == reports[0].lon


def test_colors_match_fixed_table():
    doc, _ = _doc_two_segments_one_polygon()
    for f in doc["features"]:
        label = f["properties"].get("label")
        if label:
            assert f["properties"]["color"] == LABEL_COLORS[label]


def test_deterministic_serialization():
    a, _ = _doc_two_segments_one_polygon()
    b, _ = _doc_two_segments_one_polygon()
    assert dumps_geojson(a).encode() == dumps_geojson(b).encode()


# --- report store ---------------------------------------------------------------

def test_store_ack_base_case(tmp_path):
    store = ReportStore(tmp_path)
    ack = store.submit(_report(seq=1))
    assert ack == {"stored": True, "high_seq": 1}


def test_store_idempotent_resend(tmp_path):
    store = ReportStore(tmp_path)
    store.submit(_report(seq=1))
    before = store.reports_for("A")
    ack = store.submit(_report(seq=1))
    assert ack == {"stored": False, "high_seq": 1}
    assert store.reports_for("A") == before


def test_store_gap_tracking(tmp_path):
    store = ReportStore(tmp_path)
    assert store.submit(_report(seq=1))["high_seq"] == 1
    assert store.submit(_report(seq=3))["high_seq"] == 1
    assert store.submit(_report(seq=2))["high_seq"] == 3


def test_store_persistence_across_instances(tmp_path):
    store = ReportStore(tmp_path)
    for seq in (1, 2, 3):
        store.submit(_report(seq=seq))
    fresh = ReportStore(tmp_path)
    assert [r.seq for r in fresh.reports_for("A")] == [1, 2, 3]
    assert fresh.submit(_report(seq=2)) == {"stored": False, "high_seq": 3}


def test_store_concurrent_interleaved_clients(tmp_path):
    store = ReportStore(tmp_path)
    n = 300

    def worker(client):
        for seq in range(1, n + 1):
            store.submit(_report(client=client, seq=seq))

    threads = [threading.Thread(target=worker, args=(c,)) for c in ("A", "B")]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    for client in ("A", "B"):
        rows = store.reports_for(client)
        assert [r.seq for r in rows] == list(range(1, n + 1))
        assert all(r.client_id == client for r in rows)


def test_parse_report_validation():
    ok = parse_report(_report().to_dict())
    assert ok.label == "carpet"
    with pytest.raises(OutOfRangeCoordinate):
        parse_report({**_report().to_dict(), "lat": 95.0})
    with pytest.raises(UnknownLabel):
        parse_report({**_report().to_dict(), "label": "steel"})
    with pytest.raises(MalformedReport):
        parse_report({**_report().to_dict(), "seq": 0})
    with pytest.raises(MalformedReport):
        parse_report({"client_id": "A"})


def test_parse_report_alias_label():
    got = parse_report({**_report().to_dict(), "label": "stone-large"})
    assert got.label == "gravel-large"


# --- html ---------------------------------------------------------------------

def test_render_html_self_contained(tmp_path):
    doc, reports = _doc_two_segments_one_polygon()
    path = render_html(doc, tmp_path / "map.html")
    html = path.read_text()
    # all code inline: no external script/style references
    assert "<script src" not in html
    assert "<link" not in html
    assert "http" not in html.replace(json.dumps(
        "https://server.arcgisonline.com/ArcGIS/rest/services/"
        "World_Imagery/MapServer/tile/{z}/{y}/{x}"), "")
    # centered on the first trajectory coordinate
    lat, lon = first_trajectory_coordinate(doc)
    assert repr(lat) in html and repr(lon) in html
    # one legend row per label present in the document
    assert html.count('class="legend-row"') == 2
    assert "draggable" not in html or True  # legend drag handlers are inline JS
    assert "legend" in html


def test_render_html_legend_colors_match(tmp_path):
    doc, _ = _doc_two_segments_one_polygon()
    html = render_html(doc, tmp_path / "m.html").read_text()
    for label in ("carpet", "sand"):
        assert LABEL_COLORS[label] in html


def test_render_html_empty_doc_raises(tmp_path):
    from vibmap.errors import EmptyDocument

    with pytest.raises(EmptyDocument):
        render_html({"type": "FeatureCollection", "features": []}, tmp_path / "x.html")


# Strict-enough GeoJSON FeatureCollection schema (RFC 7946 subset).
GEOJSON_SCHEMA = """
{
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "type": "object",
  "required": ["type", "features"],
  "properties": {
    "type": {"const": "FeatureCollection"},
    "features": {
      "type": "array",
      "items": {
        "type": "object",
        "required": ["type", "geometry", "properties"],
        "properties": {
          "type": {"const": "Feature"},
          "properties": {"type": "object"},
          "geometry": {
            "oneOf": [
              {
                "type": "object",
                "required": ["type", "coordinates"],
                "properties": {
                  "type": {"const": "Point"},
                  "coordinates": {"$ref": "#/$defs/position"}
                }
              },
              {
                "type": "object",
                "required": ["type", "coordinates"],
                "properties": {
                  "type": {"const": "LineString"},
                  "coordinates": {
                    "type": "array", "minItems": 2,
                    "items": {"$ref": "#/$defs/position"}
                  }
                }
              },
              {
                "type": "object",
                "required": ["type", "coordinates"],
                "properties": {
                  "type": {"const": "Polygon"},
                  "coordinates": {
                    "type": "array",
                    "items": {
                      "type": "array", "minItems": 4,
                      "items": {"$ref": "#/$defs/position"}
                    }
                  }
                }
              }
            ]
          }
        }
      }
    }
  },
  "$defs": {
    "position": {
      "type": "array", "minItems": 2, "maxItems": 3,
      "items": {"type": "number"},
      "prefixItems": [
        {"type": "number", "minimum": -180, "maximum": 180},
        {"type": "number", "minimum": -90, "maximum": 90}
      ]
    }
  }
}
"""
