"""Grain-size regression: spectral moments of microphone segments vs
particle diameter.

Per segment, a Welch PSD yields the log spectral centroid and log
bandwidth; each feature is regressed against log(diameter) across the
four granular materials (diameters 3 cm, 1.3 cm, 5 mm, 0.5 mm). Pearson
R is computed on the per-segment scatter; per-material means and a
linear-diameter fit are reported alongside.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..dsp.spectral import (
    VARIANT_LITERAL,
    spectral_bandwidth,
    spectral_centroid,
    welch_psd,
)
from ..errors import InsufficientData
from ..materials import GRAIN_MATERIALS, get_material

MIN_SEGMENTS_PER_GRAIN = 10


@dataclass
class LinearFit:
    slope: float
    intercept: float
    r_value: float

    def to_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept, "r_value": self.r_value}


@dataclass
class RegressionReport:
    variant: str
    centroid_fit: LinearFit                  # feature vs log(diameter)
    bandwidth_fit: LinearFit
    centroid_fit_linear: LinearFit           # feature vs diameter
    bandwidth_fit_linear: LinearFit
    mean_centroid: dict[str, float] = field(default_factory=dict)
    mean_bandwidth: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "centroid_fit": self.centroid_fit.to_dict(),
            "bandwidth_fit": self.bandwidth_fit.to_dict(),
            "centroid_fit_linear": self.centroid_fit_linear.to_dict(),
            "bandwidth_fit_linear": self.bandwidth_fit_linear.to_dict(),
            "mean_centroid": self.mean_centroid,
            "mean_bandwidth": self.mean_bandwidth,
        }


def fit_line(x: np.ndarray, y: np.ndarray) -> LinearFit:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    sx, sy = x.std(), y.std()
    r = float(np.corrcoef(x, y)[0, 1]) if sx > 0 and sy > 0 else 0.0
    return LinearFit(slope=float(slope), intercept=float(intercept), r_value=r)


def segment_spectral_features(
    samples: np.ndarray, rate: float, variant: str = VARIANT_LITERAL
) -> tuple[float, float]:
    ps = welch_psd(samples, rate)
    centroid = spectral_centroid(ps)
    bandwidth = spectral_bandwidth(ps, centroid, variant=variant)
    return centroid, bandwidth


def grain_regression(
    segments_by_material: dict[str, list[np.ndarray]],
    rate: float = 48000.0,
    variant: str = VARIANT_LITERAL,
) -> RegressionReport:
    """Regress spectral features against grain diameter.

    ``segments_by_material`` maps each granular material name to its MIC
    segment sample arrays; every grain needs at least 10 segments.
    """
    diam: dict[str, float] = {}
    for name in segments_by_material:
        mat = get_material(name)
        if mat.grain_diameter_m is None:
            raise InsufficientData(f"{name!r} has no grain diameter")
        diam[name] = mat.grain_diameter_m
    missing = set(GRAIN_MATERIALS) - set(segments_by_material)
    if missing:
        raise InsufficientData(f"missing grain materials: {sorted(missing)}")
    for name, segs in segments_by_material.items():
        if len(segs) < MIN_SEGMENTS_PER_GRAIN:
            raise InsufficientData(
                f"{name}: {len(segs)} segments < {MIN_SEGMENTS_PER_GRAIN}"
            )

    log_d, lin_d, cents, bands = [], [], [], []
    mean_c: dict[str, float] = {}
    mean_b: dict[str, float] = {}
    for name in sorted(segments_by_material):
        cs, bs = [], []
        for samples in segments_by_material[name]:
            c, b = segment_spectral_features(samples, rate, variant)
            cs.append(c)
            bs.append(b)
        mean_c[name] = float(np.mean(cs))
        mean_b[name] = float(np.mean(bs))
        log_d.extend([np.log(diam[name])] * len(cs))
        lin_d.extend([diam[name]] * len(cs))
        cents.extend(cs)
        bands.extend(bs)

    return RegressionReport(
        variant=variant,
        centroid_fit=fit_line(np.array(log_d), np.array(cents)),
        bandwidth_fit=fit_line(np.array(log_d), np.array(bands)),
        centroid_fit_linear=fit_line(np.array(lin_d), np.array(cents)),
        bandwidth_fit_linear=fit_line(np.array(lin_d), np.array(bands)),
        mean_centroid=mean_c,
        mean_bandwidth=mean_b,
    )
