"""STFT/Mel framing, bin placement, filterbank coverage."""

import numpy as np
import pytest

from vibmap.dsp.spectrogram import (
    acc_mel,
    frame_count,
    mel_filterbank,
    mel_spectrogram,
    mic_mel,
    power_to_db,
    stft_mag,
)
from vibmap.errors import TooShort


def test_acc_stft_baseline_shape():
    x = np.random.default_rng(0).normal(size=3200)
    spec = stft_mag(x, 1600.0)
    # (3200 - 50) // 12 + 1 frames, 50 // 2 + 1 one-sided bins
    assert spec.values.shape == (26, 263)


def test_zero_signal_zero_spectrogram():
    spec = stft_mag(np.zeros(3200), 1600.0)
    assert np.all(spec.values == 0.0)


def test_pure_tone_bin_placement():
    # 200 Hz at 1600 Hz rate with 50-sample windows: bin width 32 Hz -> bin 6
    t = np.arange(3200) / 1600.0
    x = np.sin(2 * np.pi * 200.0 * t)
    spec = stft_mag(x, 1600.0)
    assert np.all(spec.values.argmax(axis=0) == 6)


def test_single_frame_matches_naive_dft():
    rng = np.random.default_rng(3)
    x = rng.normal(size=200)
    spec = stft_mag(x, 1600.0)
    # direct DFT sum over the windowed first frame
    w = 0.5 - 0.5 * np.cos(2 * np.pi * np.arange(50) / 50)
    frame = x[:50] * w
    for k in range(26):
        ref = sum(frame[n] * np.exp(-2j * np.pi * k * n / 50) for n in range(50))
        assert spec.values[k, 0] == pytest.approx(abs(ref), rel=1e-9)


def test_frame_count_formula_random_cases(rng):
    for _ in range(200):
        w = int(rng.integers(2, 100))
        h = int(rng.integers(1, 50))
        n = int(rng.integers(w, 2000))
        x = np.zeros(n)
        spec = stft_mag(x, 1000.0, window_len=w, hop=h)
        assert spec.values.shape[1] == frame_count(n, w, h) == (n - w) // h + 1


def test_mic_mel_baseline_shape():
    x = np.random.default_rng(1).normal(size=48000)
    assert mic_mel(x).values.shape == (64, 61)


def test_acc_mel_baseline_shape():
    x = np.random.default_rng(1).normal(size=3200)
    assert acc_mel(x).values.shape == (64, 41)


def test_mel_of_silence_hits_db_floor():
    spec = mic_mel(np.zeros(48000))
    assert np.all(spec.values == 0.0)
    assert np.all(power_to_db(spec.values) == -80.0)


def test_mel_frame_rule_centered():
    x = np.zeros(12000)
    spec = mel_spectrogram(x, 48000.0, hop=800, fft_len=2048)
    assert spec.values.shape[1] == 12000 // 800 + 1


def test_filterbank_no_spectral_holes():
    # every FFT bin strictly between fmin and fmax has positive total weight
    for rate, fft_len in ((48000.0, 2048), (1600.0, 256)):
        fb = mel_filterbank(rate, fft_len)
        freqs = np.fft.rfftfreq(fft_len, 1.0 / rate)
        inside = (freqs > 20.0) & (freqs < rate / 2)
        assert np.all(fb.sum(axis=0)[inside] > 0.0)


def test_mel_values_nonnegative(rng):
    x = rng.normal(size=48000)
    assert np.all(mic_mel(x).values >= 0.0)


def test_too_short_raises():
    with pytest.raises(TooShort):
        stft_mag(np.zeros(10), 1600.0)
    with pytest.raises(TooShort):
        mel_spectrogram(np.zeros(100), 1600.0, hop=80, fft_len=256)
