"""Sensor channel definitions.

Two shoe-mounted accelerometer channels (0-800 Hz band, 1600 Hz rate) and
one microphone channel (35-18000 Hz band, 48 kHz rate). Rates are fixed
for the whole artifact; external data must be resampled to them.
"""

from __future__ import annotations

from enum import Enum


class SensorKind(str, Enum):
    ACC_FOREFOOT = "acc_fore"
    ACC_REARFOOT = "acc_rear"
    MIC = "mic"

    @property
    def nominal_rate(self) -> int:
        return 48000 if self is SensorKind.MIC else 1600

    @property
    def band(self) -> tuple[float, float]:
        return (35.0, 18000.0) if self is SensorKind.MIC else (0.0, 800.0)

    @property
    def is_acc(self) -> bool:
        return self is not SensorKind.MIC

    @property
    def window_s(self) -> float:
        """Canonical segmentation window: 2 s for ACC, 1 s for MIC."""
        return 1.0 if self is SensorKind.MIC else 2.0

    @property
    def feature_hop(self) -> int:
        """Canonical Mel frame hop in samples (also the decode length tolerance)."""
        return 800 if self is SensorKind.MIC else 80


ACC_RATE = 1600
MIC_RATE = 48000
ACC_SEGMENT_SAMPLES = 3200   # 2 s at 1600 Hz
MIC_SEGMENT_SAMPLES = 48000  # 1 s at 48 kHz
