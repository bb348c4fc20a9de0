"""Welch PSD estimation and logarithmic spectral moments.

The centroid and bandwidth are taken in log form:

    F_centroid  = log(sum(f * PSD(f))) - log(sum(PSD(f)))
    F_bandwidth = 0.5*log(sum(PSD(f) * (f - c)^2)) - 0.5*log(sum(PSD(f)))

where the deviation center c is the log centroid itself ("literal"
variant) or its linear-frequency counterpart exp(F_centroid)
("conventional" variant). Both are kept because the literal form mixes
log and linear frequency scales; results are reported for each.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal as sps

from ..errors import TooShort, ZeroPower

WELCH_SEGMENT = 1024
WELCH_SEGMENT_SHORT = 256
LOG_CLAMP = 1e-12
BANDWIDTH_FLOOR = -30.0

VARIANT_LITERAL = "literal"
VARIANT_CONVENTIONAL = "conventional"


@dataclass
class PowerSpectrum:
    freqs: np.ndarray   # Hz, strictly increasing
    psd: np.ndarray     # power per Hz, >= 0

    def total_power(self) -> float:
        return float(np.trapezoid(self.psd, self.freqs))


def welch_psd(x: np.ndarray, rate: float) -> PowerSpectrum:
    """One-sided Welch estimate: Hann segments of 1024 samples (256 when the
    input is shorter than 1024), 50% overlap, per-segment mean removal,
    density scaling."""
    x = np.asarray(x, dtype=np.float64)
    if x.size < WELCH_SEGMENT_SHORT:
        raise TooShort(f"need >= {WELCH_SEGMENT_SHORT} samples, got {x.size}")
    nperseg = WELCH_SEGMENT if x.size >= WELCH_SEGMENT else WELCH_SEGMENT_SHORT
    freqs, psd = sps.welch(
        x,
        fs=rate,
        window="hann",
        nperseg=nperseg,
        noverlap=nperseg // 2,
        detrend="constant",
        scaling="density",
    )
    return PowerSpectrum(freqs=freqs, psd=psd)


def spectral_centroid(ps: PowerSpectrum) -> float:
    """Log spectral centroid (natural log). Raises ZeroPower on empty spectra."""
    s0 = float(np.sum(ps.psd))
    if s0 <= 0:
        raise ZeroPower("spectrum has no power")
    s1 = float(np.sum(ps.freqs * ps.psd))
    return float(np.log(max(s1, LOG_CLAMP)) - np.log(s0))


def spectral_bandwidth(
    ps: PowerSpectrum,
    centroid: float | None = None,
    variant: str = VARIANT_LITERAL,
) -> float:
    """Log bandwidth of concentrated energy around the centroid.

    `variant="literal"` subtracts the log centroid from linear frequency;
    `variant="conventional"` subtracts exp(centroid). A spectrum fully
    concentrated at the deviation center returns the floor value.
    """
    s0 = float(np.sum(ps.psd))
    if s0 <= 0:
        raise ZeroPower("spectrum has no power")
    if centroid is None:
        centroid = spectral_centroid(ps)
    if variant == VARIANT_LITERAL:
        center = centroid
    elif variant == VARIANT_CONVENTIONAL:
        center = float(np.exp(centroid))
    else:
        raise ValueError(f"unknown variant {variant!r}")
    s2 = float(np.sum(ps.psd * (ps.freqs - center) ** 2))
    if s2 / s0 <= LOG_CLAMP:
        return BANDWIDTH_FLOOR
    return float(0.5 * np.log(s2) - 0.5 * np.log(s0))
