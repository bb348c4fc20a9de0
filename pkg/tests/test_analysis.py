"""Grain regression oracles, merging property, wet/dry and noise plumbing."""

import numpy as np
import pytest

from vibmap.analysis.grain import fit_line, grain_regression
from vibmap.analysis.merge import merged_label_map, remap_predictions
from vibmap.dsp.spectral import PowerSpectrum, spectral_centroid
from vibmap.errors import InsufficientData, UnknownLabel
from vibmap.materials import GRAIN_MATERIALS, MATERIAL_NAMES, get_material
from vibmap.model.training import metrics_from_predictions

RATE = 48000.0
DIAMETERS = {m: get_material(m).grain_diameter_m for m in GRAIN_MATERIALS}


def _tone_segments(freq_of_material, n_per=12, n_samples=4096, seed=0):
    """Segments that are pure tones: centroid is exactly ln(freq)."""
    rng = np.random.default_rng(seed)
    out = {}
    for material, freq in freq_of_material.items():
        segs = []
        for _ in range(n_per):
            t = np.arange(n_samples) / RATE
            phase = rng.uniform(0, 2 * np.pi)
            segs.append(np.sin(2 * np.pi * freq * t + phase))
        out[material] = segs
    return out


def test_synthetic_linear_construction_r_is_one():
    # choose tone frequencies so that ln(freq) = a*ln(d) + b exactly
    a, b = 0.35, 7.2
    freqs = {m: float(np.exp(a * np.log(d) + b)) for m, d in DIAMETERS.items()}
    segments = _tone_segments(freqs)
    report = grain_regression(segments, rate=RATE)
    assert abs(report.centroid_fit.r_value) == pytest.approx(1.0, abs=1e-3)
    assert report.centroid_fit.slope == pytest.approx(a, rel=0.02)
    # per-material means are monotone in diameter
    means = [report.mean_centroid[m] for m in
             sorted(DIAMETERS, key=lambda m: DIAMETERS[m])]
    assert means == sorted(means)


def test_shuffled_pairing_kills_correlation(rng):
    x = rng.normal(size=200)
    y = 2.0 * x + 1.0
    rs = []
    for _ in range(100):
        perm = rng.permutation(len(x))
        rs.append(abs(fit_line(x[perm], y).r_value))
    assert np.percentile(rs, 95) < 0.3


def test_grain_regression_requires_all_grains():
    segments = _tone_segments({m: 1000.0 for m in list(DIAMETERS)[:3]})
    with pytest.raises(InsufficientData):
        grain_regression(segments, rate=RATE)


def test_grain_regression_requires_min_segments():
    segments = _tone_segments({m: 1000.0 for m in DIAMETERS}, n_per=5)
    with pytest.raises(InsufficientData):
        grain_regression(segments, rate=RATE)


def test_centroid_of_tone_equals_log_freq():
    ps = PowerSpectrum(freqs=np.array([440.0]), psd=np.array([3.0]))
    assert spectral_centroid(ps) == pytest.approx(np.log(440.0), abs=1e-9)


# --- merging ------------------------------------------------------------------

def test_merged_label_map_18_to_16():
    new_names, mapping = merged_label_map(list(MATERIAL_NAMES))
    assert len(new_names) == 16
    merged = "asphalt+concrete+slab"
    assert merged in new_names
    for old in ("asphalt", "concrete", "slab"):
        assert new_names[mapping[MATERIAL_NAMES.index(old)]] == merged


def test_merging_never_lowers_accuracy(rng):
    labels = list(MATERIAL_NAMES)
    for trial in range(25):
        n = int(rng.integers(50, 400))
        y_true = rng.integers(0, 18, size=n)
        y_pred = rng.integers(0, 18, size=n)
        base = metrics_from_predictions(y_true, y_pred, 18).accuracy
        merged = remap_predictions(y_true, y_pred, labels).accuracy
        assert merged >= base


def test_merge_single_label_is_noop(rng):
    labels = list(MATERIAL_NAMES)
    y_true = rng.integers(0, 18, size=300)
    y_pred = rng.integers(0, 18, size=300)
    base = metrics_from_predictions(y_true, y_pred, 18)
    noop = remap_predictions(y_true, y_pred, labels, merge_set=["carpet"])
    assert noop.accuracy == base.accuracy
    assert noop.macro_f1 == pytest.approx(base.macro_f1)


def test_merge_all_labels_collapses_to_perfect(rng):
    labels = list(MATERIAL_NAMES)
    y_true = rng.integers(0, 18, size=100)
    y_pred = rng.integers(0, 18, size=100)
    m = remap_predictions(y_true, y_pred, labels, merge_set=labels)
    assert m.accuracy == 1.0


def test_merge_unknown_label():
    with pytest.raises(UnknownLabel):
        merged_label_map(["a", "b"], merge_set=["zzz"])
