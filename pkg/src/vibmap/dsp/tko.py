"""Nonlinear gait-energy operator and its peak smoothing.

For samples x and sampling period ts:

    phi[n] = (2*x[n]^2 + (x[n+1] - x[n-1])^2 - x[n]*(x[n+2] + x[n-2])) / (4*ts^2)

No half-wave rectification is applied. Peaks are then smoothed by a
moving maximum of width 3 followed by a moving average of width 5:

    phi_s[n] = (1/5) * sum_{i=n-2..n+2} max(phi[i-1], phi[i], phi[i+1])

Boundaries use edge replication so both outputs keep the input length
(3200 for a baseline 2 s accelerometer segment).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import TooShort


@dataclass
class TkoVector:
    phi: np.ndarray          # raw operator output
    phi_smooth: np.ndarray   # smoothed output, same length
    ts: float                # sampling period, seconds


def tko(x: np.ndarray, ts: float) -> np.ndarray:
    """Raw energy-operator sequence, same length as the input."""
    x = np.asarray(x, dtype=np.float64)
    if x.size < 5:
        raise TooShort(f"need >= 5 samples, got {x.size}")
    if ts <= 0:
        raise ValueError("ts must be positive")
    p = np.pad(x, 2, mode="edge")
    xm2, xm1 = p[:-4], p[1:-3]
    x0 = p[2:-2]
    xp1, xp2 = p[3:-1], p[4:]
    return (2.0 * x0 * x0 + (xp1 - xm1) ** 2 - x0 * (xp2 + xm2)) / (4.0 * ts * ts)


def tko_smooth(phi: np.ndarray) -> np.ndarray:
    """Moving-max(3) then moving-average(5) smoothing, length preserved.

    Out-of-range indices clamp to the nearest sample of phi itself, so the
    window maxima near the boundaries see replicated raw values.
    """
    phi = np.asarray(phi, dtype=np.float64)
    if phi.size < 5:
        raise TooShort(f"need >= 5 samples, got {phi.size}")
    p = np.pad(phi, 3, mode="edge")
    mx = np.maximum(np.maximum(p[:-2], p[1:-1]), p[2:])  # centers -2 .. n+1
    return (mx[:-4] + mx[1:-3] + mx[2:-2] + mx[3:-1] + mx[4:]) / 5.0


def tko_vector(segment_samples: np.ndarray, ts: float) -> TkoVector:
    phi = tko(segment_samples, ts)
    return TkoVector(phi=phi, phi_smooth=tko_smooth(phi), ts=ts)
