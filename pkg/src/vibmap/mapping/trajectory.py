"""Label smoothing and run-length trajectory segmentation."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import EmptyInput
from .reports import GroundReport


@dataclass
class TrajectoryPoint:
    lat: float
    lon: float
    timestamp_ms: int


@dataclass
class TrajectorySegment:
    label: str
    client_id: str
    points: list[TrajectoryPoint] = field(default_factory=list)


def smooth_labels(labels: list[str], k: int) -> list[str]:
    """Sliding-window majority vote over k consecutive labels.

    The window is centered (truncated at the ends). Ties keep the prior
    smoothed label when one exists, otherwise the report's own label.
    k=1 is the identity.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    n = len(labels)
    half = (k - 1) // 2
    out: list[str] = []
    for i in range(n):
        lo = max(0, i - half)
        hi = min(n, i + (k - half))
        window = labels[lo:hi]
        counts: dict[str, int] = {}
        for lab in window:
            counts[lab] = counts.get(lab, 0) + 1
        top = max(counts.values())
        winners = sorted(lab for lab, c in counts.items() if c == top)
        if len(winners) == 1:
            out.append(winners[0])
        else:
            out.append(out[i - 1] if i > 0 else labels[i])
    return out


def fuse_trajectory(
    reports: list[GroundReport],
    smoothing_k: int = 3,
) -> list[TrajectorySegment]:
    """Fuse a client's time-ordered reports into labeled segments.

    Labels are majority-smoothed over windows of ``smoothing_k`` reports,
    then maximal runs of equal label become segments. Each segment except
    the last additionally carries the next segment's first point so that
    transitions render as connecting lines.
    """
    if not reports:
        raise EmptyInput("no reports to fuse")
    client_id = reports[0].client_id
    labels = smooth_labels([r.label for r in reports], smoothing_k)

    segments: list[TrajectorySegment] = []
    current = TrajectorySegment(label=labels[0], client_id=client_id)
    for report, label in zip(reports, labels):
        point = TrajectoryPoint(report.lat, report.lon, report.timestamp_ms)
        if label != current.label:
            current.points.append(point)  # transition point closes the run
            segments.append(current)
            current = TrajectorySegment(label=label, client_id=client_id)
        current.points.append(point)
    segments.append(current)
    return segments
