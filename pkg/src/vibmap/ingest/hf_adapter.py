"""Best-effort adapter from a released-dataset tree to the canonical layout.

The published recordings (Hugging Face layout) are organized as audio/CSV
files whose paths carry subject and material tokens. This adapter walks a
root directory, guesses (subject, material, sensor) per file, resamples to
the canonical rates with polyphase resampling, writes canonical float32
files, and emits a manifest. Sessions that cannot be resolved or decoded
are skipped with a warning rather than failing the conversion.
"""

from __future__ import annotations

import fractions
import logging
import re
from pathlib import Path

import numpy as np
from scipy.io import wavfile
from scipy.signal import resample_poly

from ..errors import UnknownMaterial
from ..materials import get_material
from .manifest import write_sample_file
from .sensors import SensorKind

log = logging.getLogger(__name__)

_SUBJECT_RE = re.compile(r"(?:subject|subj|user|part|p|s)[-_ ]?(\d{1,3})", re.IGNORECASE)

_FORE_TOKENS = ("fore", "front", "toe", "ball")
_REAR_TOKENS = ("rear", "back", "heel")


def _guess_subject(path: Path) -> int | None:
    for part in reversed(path.parts):
        m = _SUBJECT_RE.search(part)
        if m:
            return int(m.group(1))
    digits = re.findall(r"\d{1,3}", str(path))
    return int(digits[0]) if digits else None


def _guess_material(path: Path) -> str | None:
    text = str(path).lower().replace("_", "-").replace(" ", "-")
    best = None
    for token in re.split(r"[/\\.-]", text):
        if not token:
            continue
        try:
            name = get_material(token).name
        except UnknownMaterial:
            continue
        best = name
    # compound names like "gravel-small" survive in the raw text
    for compound in ("gravel-small", "gravel-mid", "gravel-large", "carpet-red",
                     "carpet-color", "stone-small", "stone-middle", "stone-large"):
        if compound in text:
            best = get_material(compound).name
    return best


def _guess_sensor(path: Path, rate: int | None) -> SensorKind | None:
    name = path.name.lower()
    if "mic" in name or "audio" in name or (rate is not None and rate >= 20000):
        return SensorKind.MIC
    if any(t in name for t in _FORE_TOKENS):
        return SensorKind.ACC_FOREFOOT
    if any(t in name for t in _REAR_TOKENS):
        return SensorKind.ACC_REARFOOT
    if "acc" in name or "imu" in name:
        return SensorKind.ACC_FOREFOOT
    return None


def _read_samples(path: Path) -> tuple[np.ndarray, int | None]:
    suffix = path.suffix.lower()
    if suffix == ".wav":
        rate, data = wavfile.read(path)
        data = np.asarray(data, dtype=np.float64)
        if data.ndim > 1:
            data = data.mean(axis=1)
        if np.issubdtype(np.asarray(wavfile.read(path)[1]).dtype, np.integer):
            info = np.iinfo(wavfile.read(path)[1].dtype)
            data = data / max(abs(info.min), info.max)
        return data, int(rate)
    if suffix in (".csv", ".txt"):
        data = np.loadtxt(path, delimiter="," if suffix == ".csv" else None, ndmin=2)
        return np.asarray(data[:, -1], dtype=np.float64), None
    if suffix == ".npy":
        data = np.load(path)
        return np.asarray(data, dtype=np.float64).ravel(), None
    raise ValueError(f"unsupported file type: {path.suffix}")


def resample_to(samples: np.ndarray, src_rate: int, dst_rate: int) -> np.ndarray:
    if src_rate == dst_rate:
        return samples
    frac = fractions.Fraction(dst_rate, src_rate).limit_denominator(1 << 16)
    return resample_poly(samples, frac.numerator, frac.denominator)


def convert_tree(
    src_root: str | Path,
    out_dir: str | Path,
    assumed_acc_rate: int = 1600,
    default_condition: str = "Dry",
) -> Path:
    """Convert a retrieved dataset tree into the canonical manifest layout.

    Returns the path of the written manifest. Sessions missing any of the
    three sensor files are skipped with a warning (soft failure).
    """
    src_root = Path(src_root)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    found: dict[tuple[int, str], dict[SensorKind, Path]] = {}
    for path in sorted(src_root.rglob("*")):
        if not path.is_file() or path.suffix.lower() not in (".wav", ".csv", ".txt", ".npy"):
            continue
        subject = _guess_subject(path.relative_to(src_root))
        material = _guess_material(path.relative_to(src_root))
        if subject is None or material is None:
            log.warning("adapter: cannot resolve subject/material for %s; skipped", path)
            continue
        rate_hint = None
        if path.suffix.lower() == ".wav":
            try:
                rate_hint = int(wavfile.read(path)[0])
            except Exception as exc:  # unreadable wav: skip file, keep going
                log.warning("adapter: unreadable wav %s (%s); skipped", path, exc)
                continue
        sensor = _guess_sensor(path, rate_hint)
        if sensor is None:
            log.warning("adapter: cannot classify sensor for %s; skipped", path)
            continue
        slot = found.setdefault((subject, material), {})
        if sensor in slot and sensor is SensorKind.ACC_FOREFOOT:
            sensor = SensorKind.ACC_REARFOOT  # second unlabeled ACC file
        slot.setdefault(sensor, path)

    sessions = []
    for (subject, material), slot in sorted(found.items()):
        if set(slot) != set(SensorKind):
            log.warning(
                "adapter: session subject=%s material=%s incomplete (%s); skipped",
                subject, material, sorted(s.value for s in slot),
            )
            continue
        files = {}
        duration = None
        try:
            for sensor, src in slot.items():
                samples, src_rate = _read_samples(src)
                if src_rate is None:
                    src_rate = assumed_acc_rate if sensor.is_acc else sensor.nominal_rate
                samples = resample_to(samples, src_rate, sensor.nominal_rate)
                rel = f"s{subject:03d}_{material}_{sensor.value}.f32"
                write_sample_file(out_dir / rel, samples)
                files[sensor.value] = rel
                dur = samples.size / sensor.nominal_rate
                duration = dur if duration is None else min(duration, dur)
        except Exception as exc:
            log.warning(
                "adapter: session subject=%s material=%s failed (%s); skipped",
                subject, material, exc,
            )
            continue
        sessions.append(
            {
                "subject_id": subject,
                "material": material,
                "condition": default_condition,
                "plate": True,
                "duration_s": round(float(duration), 6),
                "files": files,
            }
        )

    manifest_path = out_dir / "manifest.json"
    import json

    manifest_path.write_text(
        json.dumps(
            {"subjects": sorted({s["subject_id"] for s in sessions}), "sessions": sessions},
            indent=1,
        )
    )
    log.info("adapter: wrote %d sessions to %s", len(sessions), manifest_path)
    return manifest_path
