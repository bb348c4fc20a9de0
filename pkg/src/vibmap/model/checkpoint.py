"""Model checkpoint format (.vw files).

Byte layout:

    offset 0   magic b"VWCK"
    offset 4   version, uint32 LE (currently 1)
    offset 8   header length H, uint64 LE
    offset 16  header, H bytes of UTF-8 JSON
    offset 16+H raw float32 LE parameter blocks, concatenated in the
               order listed by header["params"]

The header carries the network config, the label map, training metrics,
and per-parameter names/shapes so the blocks can be rebuilt exactly.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np
import torch

from ..errors import CorruptPayload
from .network import NetworkConfig, VibWalkNet

MAGIC = b"VWCK"
VERSION = 1


def save_checkpoint(
    path: str | Path,
    net: VibWalkNet,
    label_names: list[str],
    metrics: dict | None = None,
) -> None:
    params = []
    blocks = []
    state = net.state_dict()
    for name, tensor in state.items():
        arr = tensor.detach().cpu().numpy().astype("<f4")
        params.append({"name": name, "shape": list(arr.shape)})
        blocks.append(arr.tobytes())
    header = {
        "format": "vibwalk-checkpoint",
        "config": net.cfg.to_dict(),
        "label_map": list(label_names),
        "metrics": metrics or {},
        "params": params,
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    out = bytearray()
    out += MAGIC
    out += struct.pack("<I", VERSION)
    out += struct.pack("<Q", len(header_bytes))
    out += header_bytes
    for b in blocks:
        out += b
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_bytes(bytes(out))


def load_checkpoint(path: str | Path) -> tuple[VibWalkNet, list[str], dict]:
    raw = Path(path).read_bytes()
    if len(raw) < 16 or raw[:4] != MAGIC:
        raise CorruptPayload(f"{path}: not a checkpoint file")
    version = struct.unpack_from("<I", raw, 4)[0]
    if version != VERSION:
        raise CorruptPayload(f"{path}: unsupported version {version}")
    hlen = struct.unpack_from("<Q", raw, 8)[0]
    try:
        header = json.loads(raw[16 : 16 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptPayload(f"{path}: bad header: {exc}") from exc
    cfg = NetworkConfig.from_dict(header["config"])
    net = VibWalkNet(cfg)
    offset = 16 + hlen
    state = {}
    for meta in header["params"]:
        shape = tuple(meta["shape"])
        count = int(np.prod(shape)) if shape else 1
        nbytes = count * 4
        if offset + nbytes > len(raw):
            raise CorruptPayload(f"{path}: truncated parameter block {meta['name']}")
        arr = np.frombuffer(raw, dtype="<f4", count=count, offset=offset).reshape(shape)
        state[meta["name"]] = torch.from_numpy(arr.copy())
        offset += nbytes
    if offset != len(raw):
        raise CorruptPayload(f"{path}: {len(raw) - offset} trailing bytes")
    ref = net.state_dict()
    for name, tensor in ref.items():
        if name not in state:
            raise CorruptPayload(f"{path}: missing parameter {name}")
        state[name] = state[name].to(tensor.dtype).reshape(tensor.shape)
    net.load_state_dict(state)
    net.eval()
    return net, list(header["label_map"]), header.get("metrics", {})
