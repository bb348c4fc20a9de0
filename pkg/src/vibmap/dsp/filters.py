"""Zero-phase Butterworth filtering.

4th-order sections applied forward-backward (sosfiltfilt), so the output
has no phase distortion and the same length as the input. The 20 Hz
high-pass strips lower-limb motion for the material path; the 20 Hz
low-pass keeps it for the gait-energy path.
"""

from __future__ import annotations

import numpy as np
from scipy import signal as sps

from ..errors import InvalidCutoff, TooShort

HIGH_PASS = "HighPass"
LOW_PASS = "LowPass"

GAIT_CUTOFF_HZ = 20.0


def butter_filter(x: np.ndarray, kind: str, cutoff_hz: float, rate: float) -> np.ndarray:
    """Apply a 4th-order zero-phase Butterworth high- or low-pass filter."""
    if not 0 < cutoff_hz < rate / 2:
        raise InvalidCutoff(f"cutoff {cutoff_hz} Hz outside (0, {rate / 2}) at rate {rate}")
    if kind not in (HIGH_PASS, LOW_PASS):
        raise ValueError(f"kind must be {HIGH_PASS!r} or {LOW_PASS!r}")
    x = np.asarray(x, dtype=np.float64)
    sos = sps.butter(4, cutoff_hz, btype="highpass" if kind == HIGH_PASS else "lowpass",
                     fs=rate, output="sos")
    # sosfiltfilt needs more than 3 * (2 * n_sections + 1) samples of padding
    if x.size <= 3 * (2 * sos.shape[0] + 1):
        raise TooShort(f"signal of {x.size} samples too short to filter")
    return sps.sosfiltfilt(sos, x)


def high_pass(x: np.ndarray, rate: float, cutoff_hz: float = GAIT_CUTOFF_HZ) -> np.ndarray:
    return butter_filter(x, HIGH_PASS, cutoff_hz, rate)


def low_pass(x: np.ndarray, rate: float, cutoff_hz: float = GAIT_CUTOFF_HZ) -> np.ndarray:
    return butter_filter(x, LOW_PASS, cutoff_hz, rate)
