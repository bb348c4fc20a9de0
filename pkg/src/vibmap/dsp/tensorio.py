"""Binary tensor cache files.

Layout: a 16-byte header of four little-endian uint32 words
(rows, cols, layout tag, reserved=0) followed by rows*cols
little-endian float32 values in row-major order.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..errors import CorruptPayload
from .fusion import FeatureTensor, Layout

_HEADER = struct.Struct("<4I")

LAYOUT_TAGS: dict[Layout, int] = {
    Layout.MIC_MEL: 1,
    Layout.ACC_STFT: 2,
    Layout.ACC_MEL: 3,
    Layout.FUSED: 4,
    Layout.TKO: 5,
}
_TAG_TO_LAYOUT = {v: k for k, v in LAYOUT_TAGS.items()}


def write_tensor(path: str | Path, tensor: FeatureTensor) -> None:
    values = np.ascontiguousarray(tensor.values, dtype="<f4")
    rows, cols = values.shape
    header = _HEADER.pack(rows, cols, LAYOUT_TAGS[tensor.layout], 0)
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_bytes(header + values.tobytes())


def read_tensor(path: str | Path) -> FeatureTensor:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise CorruptPayload(f"{path}: shorter than header")
    rows, cols, tag, reserved = _HEADER.unpack_from(raw)
    if reserved != 0 or tag not in _TAG_TO_LAYOUT:
        raise CorruptPayload(f"{path}: bad header (tag={tag}, reserved={reserved})")
    expected = _HEADER.size + rows * cols * 4
    if len(raw) != expected:
        raise CorruptPayload(f"{path}: {len(raw)} bytes, expected {expected}")
    values = np.frombuffer(raw, dtype="<f4", offset=_HEADER.size).reshape(rows, cols)
    return FeatureTensor(values=values.astype(np.float64), layout=_TAG_TO_LAYOUT[tag])
