"""Geolocated ground reports and the append-only per-client store.

Each client submits a stream of (seq, timestamp, lat, lon, label,
confidence) reports. The store appends each new (client_id, seq) pair to
that client's JSON-lines log exactly once; duplicates are acknowledged
but ignored. Acks carry the highest contiguous sequence number so
clients can resend gaps.
"""

from __future__ import annotations

import json
import re
import threading
from dataclasses import asdict, dataclass
from pathlib import Path

from ..errors import MalformedReport, OutOfRangeCoordinate, UnknownLabel
from ..materials import get_material


@dataclass(frozen=True)
class GroundReport:
    client_id: str
    seq: int
    timestamp_ms: int
    lat: float
    lon: float
    label: str
    confidence: float

    def to_dict(self) -> dict:
        return asdict(self)


def parse_report(doc: dict) -> GroundReport:
    """Validate a raw JSON body into a GroundReport."""
    if not isinstance(doc, dict):
        raise MalformedReport("report body must be a JSON object")
    try:
        report = GroundReport(
            client_id=str(doc["client_id"]),
            seq=int(doc["seq"]),
            timestamp_ms=int(doc["timestamp_ms"]),
            lat=float(doc["lat"]),
            lon=float(doc["lon"]),
            label=str(doc["label"]),
            confidence=float(doc.get("confidence", 1.0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedReport(f"bad report fields: {exc}") from exc
    if not report.client_id:
        raise MalformedReport("client_id must be non-empty")
    if report.seq < 1:
        raise MalformedReport(f"seq must be >= 1, got {report.seq}")
    if not (-90.0 <= report.lat <= 90.0) or not (-180.0 <= report.lon <= 180.0):
        raise OutOfRangeCoordinate(f"lat={report.lat} lon={report.lon}")
    if not (0.0 <= report.confidence <= 1.0):
        raise MalformedReport(f"confidence {report.confidence} outside [0, 1]")
    try:
        canonical = get_material(report.label).name
    except Exception as exc:
        raise UnknownLabel(f"label {report.label!r} not in the taxonomy") from exc
    if canonical != report.label:
        report = GroundReport(**{**report.to_dict(), "label": canonical})
    return report


def _safe_name(client_id: str) -> str:
    return re.sub(r"[^A-Za-z0-9_-]", "_", client_id)


class _ClientLog:
    def __init__(self, path: Path):
        self.path = path
        self.lock = threading.Lock()
        self.seqs: set[int] = set()
        self.high_contiguous = 0
        if path.exists():
            for line in path.read_text().splitlines():
                if line.strip():
                    self.seqs.add(int(json.loads(line)["seq"]))
            self._advance()

    def _advance(self) -> None:
        while self.high_contiguous + 1 in self.seqs:
            self.high_contiguous += 1


class ReportStore:
    """Durable append-only report logs, one JSON-lines file per client."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._registry_lock = threading.Lock()
        self._clients: dict[str, _ClientLog] = {}
        for path in sorted(self.root.glob("client_*.jsonl")):
            # recover client id from the first record; fall back to filename
            client_id = None
            for line in path.read_text().splitlines():
                if line.strip():
                    client_id = json.loads(line)["client_id"]
                    break
            if client_id is not None:
                self._clients[client_id] = _ClientLog(path)

    def _log_for(self, client_id: str) -> _ClientLog:
        with self._registry_lock:
            log = self._clients.get(client_id)
            if log is None:
                log = _ClientLog(self.root / f"client_{_safe_name(client_id)}.jsonl")
                self._clients[client_id] = log
            return log

    def submit(self, report: GroundReport) -> dict:
        """Append a report idempotently; returns {stored, high_seq}."""
        log = self._log_for(report.client_id)
        with log.lock:
            if report.seq in log.seqs:
                return {"stored": False, "high_seq": log.high_contiguous}
            with log.path.open("a") as fh:
                fh.write(json.dumps(report.to_dict(), sort_keys=True) + "\n")
                fh.flush()
            log.seqs.add(report.seq)
            log._advance()
            return {"stored": True, "high_seq": log.high_contiguous}

    def client_ids(self) -> list[str]:
        with self._registry_lock:
            return sorted(self._clients)

    def reports_for(self, client_id: str) -> list[GroundReport]:
        """All stored reports of one client, ordered by sequence number."""
        log = self._log_for(client_id)
        with log.lock:
            rows = []
            if log.path.exists():
                for line in log.path.read_text().splitlines():
                    if line.strip():
                        rows.append(parse_report(json.loads(line)))
        rows.sort(key=lambda r: r.seq)
        return rows

    def all_reports(self) -> dict[str, list[GroundReport]]:
        return {cid: self.reports_for(cid) for cid in self.client_ids()}
