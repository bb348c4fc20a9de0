"""Feature tensors and the MIC+ACC Mel fusion."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from ..errors import ShapeMismatch


class Layout(str, Enum):
    MIC_MEL = "MicMel64x61"
    ACC_STFT = "AccStft"
    ACC_MEL = "AccMel64x41"
    FUSED = "Fused64x102"
    TKO = "TkoVector"


LAYOUT_SHAPES: dict[Layout, tuple[int, int]] = {
    Layout.MIC_MEL: (64, 61),
    Layout.ACC_STFT: (26, 263),
    Layout.ACC_MEL: (64, 41),
    Layout.FUSED: (64, 102),
    Layout.TKO: (1, 3200),
}


@dataclass
class FeatureTensor:
    values: np.ndarray
    layout: Layout

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        expected = LAYOUT_SHAPES[self.layout]
        if self.values.shape != expected:
            raise ShapeMismatch(
                f"layout {self.layout.value} expects {expected}, got {self.values.shape}"
            )


def standardize(x: np.ndarray) -> np.ndarray:
    """Zero-mean unit-variance scaling; constant tensors map to zeros."""
    x = np.asarray(x, dtype=np.float64)
    std = x.std()
    if std == 0:
        return np.zeros_like(x)
    return (x - x.mean()) / std


def fuse(mic_mel: FeatureTensor, acc_mel: FeatureTensor) -> FeatureTensor:
    """Standardize each Mel tensor and splice along frames, MIC first: 64 x 102."""
    if mic_mel.layout is not Layout.MIC_MEL or acc_mel.layout is not Layout.ACC_MEL:
        raise ShapeMismatch(
            f"fuse expects ({Layout.MIC_MEL.value}, {Layout.ACC_MEL.value}), "
            f"got ({mic_mel.layout.value}, {acc_mel.layout.value})"
        )
    fused = np.concatenate(
        [standardize(mic_mel.values), standardize(acc_mel.values)], axis=1
    )
    return FeatureTensor(values=fused, layout=Layout.FUSED)
