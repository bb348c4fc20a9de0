"""Dataset manifest loading and raw recording decoding.

On-disk format: a JSON manifest enumerating sessions, plus one headerless
little-endian float32 file per (session, sensor). A session is one subject
walking one material for a fixed duration under one condition.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import (
    CorruptPayload,
    DuplicateSession,
    MissingManifest,
    RateMismatch,
)
from ..materials import Condition, get_material
from .sensors import SensorKind


@dataclass(frozen=True)
class Session:
    subject_id: int
    material: str                # canonical material name
    condition: Condition
    plate: bool                  # transmitter plate mounted on the sole
    duration_s: float
    files: dict[str, str]        # sensor value -> path relative to manifest dir

    @property
    def key(self) -> tuple:
        return (self.subject_id, self.material, self.condition.value, self.plate)


@dataclass
class DatasetManifest:
    root: Path
    subjects: list[int]
    sessions: list[Session]

    def file_path(self, session: Session, sensor: SensorKind) -> Path:
        return self.root / session.files[sensor.value]

    def total_seconds(self, sensor: SensorKind) -> float:
        return sum(s.duration_s for s in self.sessions if sensor.value in s.files)


@dataclass
class Recording:
    session: Session
    sensor: SensorKind
    samples: np.ndarray          # float64, 1-D
    rate: int

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.rate


def load_manifest(path: str | Path) -> DatasetManifest:
    """Load and validate a dataset manifest.

    Raises MissingManifest when the file is absent, unreadable, or lists
    zero sessions; UnknownMaterial for names outside the taxonomy;
    DuplicateSession when (subject, material, condition, plate) repeats.
    """
    path = Path(path)
    if path.is_dir():
        path = path / "manifest.json"
    if not path.exists():
        raise MissingManifest(f"no manifest at {path}")
    try:
        doc = json.loads(path.read_text())
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise MissingManifest(f"unreadable manifest {path}: {exc}") from exc

    raw_sessions = doc.get("sessions") or []
    if not raw_sessions:
        raise MissingManifest(f"manifest {path} lists no sessions")

    sessions: list[Session] = []
    seen: set[tuple] = set()
    for i, entry in enumerate(raw_sessions):
        try:
            material = get_material(entry["material"]).name
            session = Session(
                subject_id=int(entry["subject_id"]),
                material=material,
                condition=Condition(entry.get("condition", "Dry")),
                plate=bool(entry.get("plate", True)),
                duration_s=float(entry["duration_s"]),
                files={k: str(v) for k, v in entry["files"].items()},
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise MissingManifest(f"malformed session entry #{i}: {exc}") from exc
        if session.duration_s <= 0:
            raise MissingManifest(f"session entry #{i} has non-positive duration")
        missing = {s.value for s in SensorKind} - set(session.files)
        if missing:
            raise MissingManifest(f"session entry #{i} missing sensor files: {sorted(missing)}")
        if session.key in seen:
            raise DuplicateSession(
                session.subject_id, session.material, session.condition.value, session.plate
            )
        seen.add(session.key)
        sessions.append(session)

    subjects = doc.get("subjects") or sorted({s.subject_id for s in sessions})
    return DatasetManifest(root=path.parent, subjects=[int(s) for s in subjects], sessions=sessions)


def decode_recording(
    manifest: DatasetManifest,
    session: Session,
    sensor: SensorKind,
    declared_rate: int | None = None,
) -> Recording:
    """Read one raw float32 sample file into a Recording. No resampling.

    The declared rate (default: the sensor's nominal rate) must equal the
    nominal rate; the decoded length must match duration*rate within one
    canonical feature hop.
    """
    rate = sensor.nominal_rate if declared_rate is None else int(declared_rate)
    if rate != sensor.nominal_rate:
        raise RateMismatch(
            f"{sensor.value} declared {rate} Hz, nominal is {sensor.nominal_rate} Hz"
        )
    fpath = manifest.file_path(session, sensor)
    if not fpath.exists():
        raise CorruptPayload(f"sample file missing: {fpath}")
    raw = fpath.read_bytes()
    if len(raw) % 4 != 0:
        raise CorruptPayload(f"{fpath}: size {len(raw)} not a multiple of float32")
    samples = np.frombuffer(raw, dtype="<f4").astype(np.float64)
    if not np.all(np.isfinite(samples)):
        raise CorruptPayload(f"{fpath}: non-finite samples")
    expected = round(session.duration_s * rate)
    if abs(samples.size - expected) > sensor.feature_hop:
        raise CorruptPayload(
            f"{fpath}: {samples.size} samples, expected {expected} "
            f"(tolerance {sensor.feature_hop})"
        )
    return Recording(session=session, sensor=sensor, samples=samples, rate=rate)


def write_sample_file(path: str | Path, samples: np.ndarray) -> None:
    """Write samples in the canonical headerless little-endian float32 format."""
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_bytes(np.asarray(samples, dtype="<f4").tobytes())
