"""Self-contained interactive HTML map.

The emitted file inlines all markup, styles, and scripts; the only
network requests a browser makes are satellite tile fetches from the
configurable tile URL template. The map centers on the first trajectory
coordinate and shows a draggable legend of the label color table.
"""

from __future__ import annotations

import json
from pathlib import Path

from ..errors import EmptyDocument
from .geojson import color_of, first_trajectory_coordinate

DEFAULT_TILE_URL = (
    "https://server.arcgisonline.com/ArcGIS/rest/services/"
    "World_Imagery/MapServer/tile/{z}/{y}/{x}"
)

_TEMPLATE = """<!DOCTYPE html>
<html>
<head>
<meta charset="utf-8">
<title>vibmap haptic map</title>
<style>
  html, body { margin: 0; height: 100%; }
  #map { position: relative; width: 100%; height: 100%; overflow: hidden;
         background: #20262e; cursor: grab; }
  #map.dragging { cursor: grabbing; }
  #tiles img { position: absolute; width: 256px; height: 256px;
               user-select: none; pointer-events: none; }
  #overlay { position: absolute; left: 0; top: 0; pointer-events: none; }
  #legend { position: absolute; top: 12px; right: 12px; background: rgba(255,255,255,0.92);
            border-radius: 6px; padding: 8px 12px; font: 12px sans-serif;
            box-shadow: 0 1px 4px rgba(0,0,0,0.4); cursor: move; z-index: 10; }
  #legend h3 { margin: 0 0 6px; font-size: 13px; }
  .legend-row { display: flex; align-items: center; margin: 2px 0; }
  .legend-swatch { width: 14px; height: 14px; border-radius: 3px; margin-right: 6px;
                   border: 1px solid #555; }
  #zoom { position: absolute; top: 12px; left: 12px; z-index: 10; }
  #zoom button { display: block; width: 30px; height: 30px; margin-bottom: 4px;
                 font-size: 18px; cursor: pointer; }
</style>
</head>
<body>
<div id="map">
  <div id="tiles"></div>
  <svg id="overlay"></svg>
  <div id="zoom">
    <button id="zin">+</button>
    <button id="zout">&minus;</button>
  </div>
  <div id="legend">
    <h3>Ground materials</h3>
__LEGEND_ROWS__
  </div>
</div>
<script id="geojson" type="application/json">__GEOJSON__</script>
<script>
"use strict";
const DATA = JSON.parse(document.getElementById("geojson").textContent);
const TILE_URL = __TILE_URL__;
const TILE = 256;
let center = {lat: __CENTER_LAT__, lon: __CENTER_LON__};
let zoom = __ZOOM__;

const map = document.getElementById("map");
const tiles = document.getElementById("tiles");
const overlay = document.getElementById("overlay");

function project(lat, lon, z) {
  const scale = TILE * Math.pow(2, z);
  const x = (lon + 180) / 360 * scale;
  const s = Math.sin(lat * Math.PI / 180);
  const y = (0.5 - Math.log((1 + s) / (1 - s)) / (4 * Math.PI)) * scale;
  return [x, y];
}

function render() {
  const w = map.clientWidth, h = map.clientHeight;
  const [cx, cy] = project(center.lat, center.lon, zoom);
  const ox = cx - w / 2, oy = cy - h / 2;
  const n = Math.pow(2, zoom);
  tiles.innerHTML = "";
  const tx0 = Math.floor(ox / TILE), ty0 = Math.floor(oy / TILE);
  const tx1 = Math.floor((ox + w) / TILE), ty1 = Math.floor((oy + h) / TILE);
  for (let tx = tx0; tx <= tx1; tx++) {
    for (let ty = Math.max(0, ty0); ty <= Math.min(n - 1, ty1); ty++) {
      const img = document.createElement("img");
      const wrapped = ((tx % n) + n) % n;
      img.src = TILE_URL.replace("{z}", zoom).replace("{x}", wrapped).replace("{y}", ty);
      img.style.left = (tx * TILE - ox) + "px";
      img.style.top = (ty * TILE - oy) + "px";
      tiles.appendChild(img);
    }
  }
  overlay.setAttribute("width", w);
  overlay.setAttribute("height", h);
  const toScreen = (lon, lat) => {
    const [px, py] = project(lat, lon, zoom);
    return (px - ox).toFixed(1) + "," + (py - oy).toFixed(1);
  };
  let svg = "";
  for (const f of DATA.features) {
    const g = f.geometry, p = f.properties || {};
    if (g.type === "Polygon") {
      const pts = g.coordinates[0].map(c => toScreen(c[0], c[1])).join(" ");
      svg += `<polygon points="${pts}" fill="${p.color}" fill-opacity="0.35" ` +
             `stroke="${p.color}" stroke-width="1"/>`;
    } else if (g.type === "LineString") {
      const pts = g.coordinates.map(c => toScreen(c[0], c[1])).join(" ");
      svg += `<polyline points="${pts}" fill="none" stroke="${p.color}" ` +
             `stroke-width="4" stroke-linecap="round" stroke-opacity="0.9"/>`;
    } else if (g.type === "Point") {
      const [sx, sy] = toScreen(g.coordinates[0], g.coordinates[1]).split(",");
      const fill = p.kind === "start-marker" ? "#2ecc40" : "#ff4136";
      svg += `<circle cx="${sx}" cy="${sy}" r="7" fill="${fill}" stroke="#fff" ` +
             `stroke-width="2"/>`;
    }
  }
  overlay.innerHTML = svg;
}

let drag = null;
map.addEventListener("mousedown", e => {
  if (e.target.closest("#legend") || e.target.closest("#zoom")) return;
  drag = {x: e.clientX, y: e.clientY};
  map.classList.add("dragging");
});
window.addEventListener("mousemove", e => {
  if (!drag) return;
  const scale = TILE * Math.pow(2, zoom);
  const [cx, cy] = project(center.lat, center.lon, zoom);
  const nx = cx - (e.clientX - drag.x), ny = cy - (e.clientY - drag.y);
  center.lon = nx / scale * 360 - 180;
  const yy = 0.5 - ny / scale;
  center.lat = Math.atan(Math.sinh(4 * Math.PI * yy / 2)) * 180 / Math.PI;
  drag = {x: e.clientX, y: e.clientY};
  render();
});
window.addEventListener("mouseup", () => { drag = null; map.classList.remove("dragging"); });
map.addEventListener("wheel", e => {
  e.preventDefault();
  zoom = Math.max(2, Math.min(19, zoom + (e.deltaY < 0 ? 1 : -1)));
  render();
});
document.getElementById("zin").onclick = () => { zoom = Math.min(19, zoom + 1); render(); };
document.getElementById("zout").onclick = () => { zoom = Math.max(2, zoom - 1); render(); };

const legend = document.getElementById("legend");
let ldrag = null;
legend.addEventListener("mousedown", e => {
  const r = legend.getBoundingClientRect();
  ldrag = {dx: e.clientX - r.left, dy: e.clientY - r.top};
  e.stopPropagation();
});
window.addEventListener("mousemove", e => {
  if (!ldrag) return;
  legend.style.left = (e.clientX - ldrag.dx) + "px";
  legend.style.top = (e.clientY - ldrag.dy) + "px";
  legend.style.right = "auto";
});
window.addEventListener("mouseup", () => { ldrag = null; });

window.addEventListener("resize", render);
render();
</script>
</body>
</html>
"""


def render_html(
    geojson_doc: dict,
    out_path: str | Path,
    tile_url: str = DEFAULT_TILE_URL,
    zoom: int = 18,
) -> Path:
    """Write the interactive map for a GeoJSON document; returns the path."""
    if not geojson_doc.get("features"):
        raise EmptyDocument("no features to render")
    lat, lon = first_trajectory_coordinate(geojson_doc)
    labels = sorted(
        {
            f["properties"]["label"]
            for f in geojson_doc["features"]
            if "label" in f.get("properties", {})
        }
    )
    rows = "\n".join(
        f'    <div class="legend-row"><span class="legend-swatch" '
        f'style="background:{color_of(label)}"></span>{label}</div>'
        for label in labels
    )
    html = (
        _TEMPLATE.replace("__GEOJSON__", json.dumps(geojson_doc, sort_keys=True))
        .replace("__TILE_URL__", json.dumps(tile_url))
        .replace("__CENTER_LAT__", repr(lat))
        .replace("__CENTER_LON__", repr(lon))
        .replace("__ZOOM__", str(zoom))
        .replace("__LEGEND_ROWS__", rows)
    )
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(html)
    return out_path
