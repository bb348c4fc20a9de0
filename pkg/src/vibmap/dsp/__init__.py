"""Signal transforms: filtering, spectrograms, gait energy, spectral moments, fusion."""

from .features import FEATURE_KINDS, FeatureSet, featurize_index, load_feature_set
from .filters import GAIT_CUTOFF_HZ, HIGH_PASS, LOW_PASS, butter_filter, high_pass, low_pass
from .fusion import LAYOUT_SHAPES, FeatureTensor, Layout, fuse, standardize
from .spectral import (
    BANDWIDTH_FLOOR,
    VARIANT_CONVENTIONAL,
    VARIANT_LITERAL,
    PowerSpectrum,
    spectral_bandwidth,
    spectral_centroid,
    welch_psd,
)
from .spectrogram import (
    ACC_MEL_FFT,
    ACC_MEL_HOP,
    DB_FLOOR,
    MIC_MEL_FFT,
    MIC_MEL_HOP,
    N_MELS,
    STFT_HOP,
    STFT_WINDOW,
    BinAxis,
    Spectrogram,
    acc_mel,
    frame_count,
    hz_to_mel,
    mel_filterbank,
    mel_spectrogram,
    mel_to_hz,
    mic_mel,
    power_to_db,
    stft_mag,
)
from .tensorio import LAYOUT_TAGS, read_tensor, write_tensor
from .tko import TkoVector, tko, tko_smooth, tko_vector

__all__ = [
    "ACC_MEL_FFT",
    "ACC_MEL_HOP",
    "BANDWIDTH_FLOOR",
    "DB_FLOOR",
    "FEATURE_KINDS",
    "GAIT_CUTOFF_HZ",
    "HIGH_PASS",
    "LAYOUT_SHAPES",
    "LAYOUT_TAGS",
    "LOW_PASS",
    "MIC_MEL_FFT",
    "MIC_MEL_HOP",
    "N_MELS",
    "STFT_HOP",
    "STFT_WINDOW",
    "VARIANT_CONVENTIONAL",
    "VARIANT_LITERAL",
    "BinAxis",
    "FeatureSet",
    "FeatureTensor",
    "Layout",
    "PowerSpectrum",
    "Spectrogram",
    "TkoVector",
    "acc_mel",
    "butter_filter",
    "featurize_index",
    "frame_count",
    "fuse",
    "high_pass",
    "hz_to_mel",
    "load_feature_set",
    "low_pass",
    "mel_filterbank",
    "mel_spectrogram",
    "mel_to_hz",
    "mic_mel",
    "power_to_db",
    "read_tensor",
    "spectral_bandwidth",
    "spectral_centroid",
    "standardize",
    "stft_mag",
    "tko",
    "tko_smooth",
    "tko_vector",
    "welch_psd",
    "write_tensor",
]
