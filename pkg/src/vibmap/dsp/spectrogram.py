"""STFT magnitude and Mel power spectrograms, built directly on the FFT.

Two framing conventions are used on purpose:

* `stft_mag` frames the raw signal (no padding): F = (N - W) // H + 1
  frames. A 2 s / 3200-sample accelerometer segment with a 50-sample
  window and hop 12 gives 26 x 263.
* `mel_spectrogram` centers frames on reflect-padded signal, giving
  F = N // H + 1 frames: 64 x 61 for a 1 s microphone segment
  (hop 800, fft 2048) and 64 x 41 for a 2 s accelerometer segment
  (hop 80, fft 256).

The Mel filterbank uses the HTK scale with triangular filters between
20 Hz (matching the high-pass) and rate/2, without area normalization.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from ..errors import TooShort

STFT_WINDOW = 50
STFT_HOP = 12          # 75% overlap of 50 samples is 37.5; fixed at 12
N_MELS = 64
MEL_FMIN_HZ = 20.0
DB_FLOOR = -80.0

MIC_MEL_HOP = 800
MIC_MEL_FFT = 2048
ACC_MEL_HOP = 80
ACC_MEL_FFT = 256


class BinAxis(str, Enum):
    LINEAR_HZ = "LinearHz"
    MEL = "Mel"


@dataclass
class Spectrogram:
    values: np.ndarray       # (freq_bins, frames), non-negative
    bin_axis: BinAxis
    frame_hop: int           # samples
    source_rate: float

    @property
    def n_bins(self) -> int:
        return self.values.shape[0]

    @property
    def n_frames(self) -> int:
        return self.values.shape[1]


def _hann(n: int) -> np.ndarray:
    # periodic Hann
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)


def frame_count(n: int, window: int, hop: int) -> int:
    if n < window:
        return 0
    return (n - window) // hop + 1


def _frame(x: np.ndarray, window: int, hop: int) -> np.ndarray:
    n_frames = frame_count(x.size, window, hop)
    view = np.lib.stride_tricks.sliding_window_view(x, window)[::hop]
    return view[:n_frames]


def stft_mag(
    x: np.ndarray,
    rate: float,
    window_len: int = STFT_WINDOW,
    hop: int = STFT_HOP,
) -> Spectrogram:
    """One-sided magnitude STFT with a Hann window, no padding."""
    x = np.asarray(x, dtype=np.float64)
    if x.size < window_len:
        raise TooShort(f"{x.size} samples < window {window_len}")
    frames = _frame(x, window_len, hop) * _hann(window_len)
    mag = np.abs(np.fft.rfft(frames, axis=1)).T  # (bins, frames)
    return Spectrogram(values=mag, bin_axis=BinAxis.LINEAR_HZ, frame_hop=hop, source_rate=rate)


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(
    rate: float,
    fft_len: int,
    n_mels: int = N_MELS,
    fmin_hz: float = MEL_FMIN_HZ,
    fmax_hz: float | None = None,
) -> np.ndarray:
    """Triangular HTK-scale filters, (n_mels, fft_len // 2 + 1), peak 1."""
    fmax_hz = rate / 2 if fmax_hz is None else fmax_hz
    points_hz = mel_to_hz(np.linspace(hz_to_mel(fmin_hz), hz_to_mel(fmax_hz), n_mels + 2))
    bins_hz = np.fft.rfftfreq(fft_len, d=1.0 / rate)
    fb = np.zeros((n_mels, bins_hz.size))
    for m in range(n_mels):
        left, center, right = points_hz[m], points_hz[m + 1], points_hz[m + 2]
        up = (bins_hz - left) / (center - left)
        down = (right - bins_hz) / (right - center)
        fb[m] = np.maximum(0.0, np.minimum(up, down))
    return fb


def mel_spectrogram(
    x: np.ndarray,
    rate: float,
    hop: int,
    fft_len: int,
    n_mels: int = N_MELS,
    fmin_hz: float = MEL_FMIN_HZ,
) -> Spectrogram:
    """Power Mel spectrogram with centered (reflect-padded) frames.

    Frame count is N // hop + 1. No decibel conversion here; see
    `power_to_db` for the fusion path.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.size < fft_len:
        raise TooShort(f"{x.size} samples < fft length {fft_len}")
    pad = fft_len // 2
    padded = np.pad(x, pad, mode="reflect")
    frames = _frame(padded, fft_len, hop)
    expected = x.size // hop + 1
    frames = frames[:expected]
    power = np.abs(np.fft.rfft(frames * _hann(fft_len), axis=1)) ** 2
    mel = mel_filterbank(rate, fft_len, n_mels, fmin_hz) @ power.T
    return Spectrogram(values=mel, bin_axis=BinAxis.MEL, frame_hop=hop, source_rate=rate)


def power_to_db(power: np.ndarray, floor_db: float = DB_FLOOR) -> np.ndarray:
    """10*log10 with an absolute floor; silence maps to the floor exactly."""
    amin = 10.0 ** (floor_db / 10.0)
    return 10.0 * np.log10(np.maximum(np.asarray(power, dtype=np.float64), amin))


def mic_mel(segment_samples: np.ndarray, rate: float = 48000.0) -> Spectrogram:
    return mel_spectrogram(segment_samples, rate, hop=MIC_MEL_HOP, fft_len=MIC_MEL_FFT)


def acc_mel(segment_samples: np.ndarray, rate: float = 1600.0) -> Spectrogram:
    return mel_spectrogram(segment_samples, rate, hop=ACC_MEL_HOP, fft_len=ACC_MEL_FFT)
