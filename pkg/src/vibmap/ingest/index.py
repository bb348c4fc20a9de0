"""Validated segment index: the bridge between raw recordings and features.

`build_segment_index` decodes every referenced sample file (validating
rates and lengths), enumerates the canonical segments, and writes a JSON
index that downstream featurization consumes without re-validation.
"""

from __future__ import annotations

import json
from pathlib import Path

from .manifest import DatasetManifest, decode_recording, load_manifest
from .segmentation import balance_report, segment
from .sensors import SensorKind

INDEX_VERSION = 1


def build_segment_index(manifest: DatasetManifest) -> dict:
    sessions = []
    segments = []
    counts_by_material: dict[str, int] = {}
    for sess in manifest.sessions:
        sessions.append(
            {
                "subject_id": sess.subject_id,
                "material": sess.material,
                "condition": sess.condition.value,
                "plate": sess.plate,
                "duration_s": sess.duration_s,
                "files": sess.files,
            }
        )
        for sensor in SensorKind:
            rec = decode_recording(manifest, sess, sensor)
            for seg in segment(rec):
                segments.append(
                    {
                        "id": seg.segment_id,
                        "subject_id": seg.subject_id,
                        "material": seg.material,
                        "condition": seg.condition.value,
                        "plate": seg.plate,
                        "sensor": sensor.value,
                        "file": sess.files[sensor.value],
                        "rate": seg.rate,
                        "start_index": seg.start_index,
                        "n_samples": int(seg.samples.size),
                    }
                )
                counts_by_material[seg.material] = counts_by_material.get(seg.material, 0) + 1
    return {
        "version": INDEX_VERSION,
        "root": str(manifest.root),
        "subjects": manifest.subjects,
        "sessions": sessions,
        "segments": segments,
        "balance": balance_report(counts_by_material),
    }


def write_segment_index(manifest_path: str | Path, out_path: str | Path) -> dict:
    manifest = load_manifest(manifest_path)
    index = build_segment_index(manifest)
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(json.dumps(index, indent=1, sort_keys=True))
    return index


def load_segment_index(path: str | Path) -> dict:
    return json.loads(Path(path).read_text())
