"""HTTP service: report submission and map retrieval.

POST /v1/report      JSON GroundReport -> {"stored": bool, "high_seq": int}
GET  /v1/map.geojson fused FeatureCollection over all stored reports
GET  /v1/map.html    self-contained interactive map
GET  /v1/health      liveness probe

Submissions from many clients may interleave; per-client logs stay
independently ordered. Map reads take a snapshot of the logs and never
block submission.
"""

from __future__ import annotations

import tempfile
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import HTMLResponse, JSONResponse, Response

from ..errors import MalformedReport, OutOfRangeCoordinate, UnknownLabel
from .coverage import coverage_polygons
from .geojson import dumps_geojson, emit_geojson
from .html import DEFAULT_TILE_URL, render_html
from .reports import ReportStore, parse_report
from .trajectory import fuse_trajectory


def build_map_document(
    store: ReportStore,
    smoothing_k: int = 3,
    radius_m: float = 5.0,
) -> dict:
    """Fuse every client's log into one FeatureCollection.

    Pure function of the ordered logs: two stores holding identical logs
    produce byte-identical serializations.
    """
    segments = []
    all_reports = []
    for client_id in store.client_ids():
        reports = store.reports_for(client_id)
        if not reports:
            continue
        all_reports.extend(reports)
        segments.extend(fuse_trajectory(reports, smoothing_k))
    polygons = coverage_polygons(all_reports, radius_m) if all_reports else []
    return emit_geojson(segments, polygons)


def create_app(
    store_dir: str | Path,
    smoothing_k: int = 3,
    radius_m: float = 5.0,
    tile_url: str = DEFAULT_TILE_URL,
) -> FastAPI:
    store = ReportStore(store_dir)
    app = FastAPI(title="vibmap haptic map service")
    app.state.store = store

    @app.get("/v1/health")
    def health():
        return {"status": "ok", "clients": len(store.client_ids())}

    @app.post("/v1/report")
    async def submit_report(request: Request):
        try:
            body = await request.json()
        except Exception:
            raise HTTPException(status_code=400, detail="body is not valid JSON")
        try:
            report = parse_report(body)
        except (MalformedReport, OutOfRangeCoordinate) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        except UnknownLabel as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return store.submit(report)

    @app.get("/v1/map.geojson")
    def map_geojson():
        doc = build_map_document(store, smoothing_k, radius_m)
        return Response(content=dumps_geojson(doc), media_type="application/geo+json")

    @app.get("/v1/map.html")
    def map_html():
        doc = build_map_document(store, smoothing_k, radius_m)
        if not doc["features"]:
            raise HTTPException(status_code=404, detail="no reports stored yet")
        with tempfile.TemporaryDirectory() as tmp:
            path = render_html(doc, Path(tmp) / "map.html", tile_url=tile_url)
            return HTMLResponse(path.read_text())

    return app
