"""Fixed-window, fixed-stride segmentation of recordings.

Baseline windows: 2 s / stride 2 s for ACC (3200 samples, no overlap),
1 s / stride 1 s for MIC. Trailing partial windows are discarded.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import TooShort
from ..materials import Condition
from .manifest import Recording
from .sensors import SensorKind


@dataclass
class Segment:
    segment_id: str
    subject_id: int
    material: str
    condition: Condition
    plate: bool
    sensor: SensorKind
    start_index: int
    samples: np.ndarray          # exactly window*rate samples
    rate: int

    @property
    def window_s(self) -> float:
        return self.samples.size / self.rate


def segment_count(n_samples: int, window: int, stride: int) -> int:
    if n_samples < window:
        return 0
    return (n_samples - window) // stride + 1


def segment(
    recording: Recording,
    window_s: float | None = None,
    stride_s: float | None = None,
) -> list[Segment]:
    """Slice a recording into non-overlapping (by default) labeled windows.

    Returns floor((N - W) / S) + 1 segments of exactly W samples. Raises
    TooShort when the recording cannot fill one window.
    """
    if window_s is None:
        window_s = recording.sensor.window_s
    if stride_s is None:
        stride_s = window_s
    if window_s <= 0 or stride_s <= 0:
        raise ValueError("window and stride must be positive")
    w = round(window_s * recording.rate)
    s = round(stride_s * recording.rate)
    n = recording.samples.size
    count = segment_count(n, w, s)
    if count < 1:
        raise TooShort(
            f"recording of {n} samples shorter than one {w}-sample window"
        )
    sess = recording.session
    out: list[Segment] = []
    for k in range(count):
        start = k * s
        out.append(
            Segment(
                segment_id=(
                    f"s{sess.subject_id:03d}-{sess.material}-{sess.condition.value}"
                    f"-p{int(sess.plate)}-{recording.sensor.value}-{k:05d}"
                ),
                subject_id=sess.subject_id,
                material=sess.material,
                condition=sess.condition,
                plate=sess.plate,
                sensor=recording.sensor,
                start_index=start,
                samples=recording.samples[start : start + w],
                rate=recording.rate,
            )
        )
    return out


def balance_report(counts_by_material: dict[str, int]) -> dict:
    """Per-material segment-count spread, as max relative deviation from the mean."""
    if not counts_by_material:
        return {"counts": {}, "max_rel_deviation": 0.0}
    values = np.array(list(counts_by_material.values()), dtype=float)
    mean = values.mean()
    dev = float(np.abs(values - mean).max() / mean) if mean > 0 else 0.0
    return {"counts": dict(counts_by_material), "max_rel_deviation": dev}
