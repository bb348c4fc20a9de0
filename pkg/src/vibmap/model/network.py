"""Residual CNN over time-frequency feature tensors.

Five residual blocks of two 3x3 convolutions each (ten conv layers),
channel widths 32/64/128/256/512 in the reference configuration, with
spatial downsampling at the start of blocks 2-5. An optional auxiliary
path embeds the 3200-sample gait-energy vector through an MLP
(3200 -> 128 -> 128); each block projects that embedding to its channel
count, layer-normalizes it, and adds it after the residual sum, before
the final ReLU. The head is global average pooling plus one fully
connected layer.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import torch
import torch.nn as nn
import torch.nn.functional as F

from ..errors import BadShape, NonFiniteActivation, ShapeMismatch

REFERENCE_CHANNELS = (32, 64, 128, 256, 512)
AUX_INPUT_DIM = 3200
AUX_EMBED_DIM = 128


@dataclass(frozen=True)
class NetworkConfig:
    input_shape: tuple[int, int, int]          # (1, rows, cols)
    n_classes: int
    block_channels: tuple[int, ...] = REFERENCE_CHANNELS
    use_aux: bool = False
    aux_in: int = AUX_INPUT_DIM
    aux_hidden: int = AUX_EMBED_DIM
    aux_layers: int = 2
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "input_shape": list(self.input_shape),
            "n_classes": self.n_classes,
            "block_channels": list(self.block_channels),
            "use_aux": self.use_aux,
            "aux_in": self.aux_in,
            "aux_hidden": self.aux_hidden,
            "aux_layers": self.aux_layers,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NetworkConfig":
        return cls(
            input_shape=tuple(d["input_shape"]),
            n_classes=int(d["n_classes"]),
            block_channels=tuple(d["block_channels"]),
            use_aux=bool(d["use_aux"]),
            aux_in=int(d["aux_in"]),
            aux_hidden=int(d["aux_hidden"]),
            aux_layers=int(d["aux_layers"]),
            seed=int(d["seed"]),
        )


class BasicBlock(nn.Module):
    """Two 3x3 convs with batch norm, a shortcut, and an optional aux add.

    The shortcut carries a 1x1 projection whenever channels or stride
    change. When the block receives an aux embedding, a linear map plus
    layer norm projects it to the output channel count and the result is
    broadcast-added over the spatial grid after the residual sum.
    """

    def __init__(self, in_channels: int, out_channels: int, stride: int = 1,
                 aux_dim: int = 0):
        super().__init__()
        self.conv1 = nn.Conv2d(in_channels, out_channels, 3, stride=stride,
                               padding=1, bias=False)
        self.bn1 = nn.BatchNorm2d(out_channels)
        self.conv2 = nn.Conv2d(out_channels, out_channels, 3, padding=1, bias=False)
        self.bn2 = nn.BatchNorm2d(out_channels)
        if stride != 1 or in_channels != out_channels:
            self.shortcut = nn.Sequential(
                nn.Conv2d(in_channels, out_channels, 1, stride=stride, bias=False),
                nn.BatchNorm2d(out_channels),
            )
        else:
            self.shortcut = nn.Identity()
        self.use_aux = aux_dim > 0
        if self.use_aux:
            self.aux_proj = nn.Linear(aux_dim, out_channels)
            self.aux_norm = nn.LayerNorm(out_channels)

    def forward(self, x: torch.Tensor, aux: torch.Tensor | None = None) -> torch.Tensor:
        out = F.relu(self.bn1(self.conv1(x)))
        out = self.bn2(self.conv2(out))
        out = out + self.shortcut(x)
        if self.use_aux and aux is not None:
            add = self.aux_norm(self.aux_proj(aux))
            out = out + add[:, :, None, None]
        return F.relu(out)


class VibWalkNet(nn.Module):
    def __init__(self, cfg: NetworkConfig):
        super().__init__()
        if cfg.n_classes < 2:
            raise BadShape(f"need >= 2 classes, got {cfg.n_classes}")
        if len(cfg.input_shape) != 3 or cfg.input_shape[0] != 1:
            raise BadShape(f"input_shape must be (1, rows, cols), got {cfg.input_shape}")
        rows, cols = cfg.input_shape[1], cfg.input_shape[2]
        if rows < 8 or cols < 8:
            raise BadShape(f"input grid {rows}x{cols} too small (need >= 8x8)")
        n_down = max(0, len(cfg.block_channels) - 1)
        if rows >> n_down < 1 or cols >> n_down < 1:
            raise BadShape(
                f"input {rows}x{cols} collapses below 1x1 after {n_down} downsamplings"
            )
        self.cfg = cfg
        chans = cfg.block_channels
        self.stem = nn.Sequential(
            nn.Conv2d(1, chans[0], 3, padding=1, bias=False),
            nn.BatchNorm2d(chans[0]),
            nn.ReLU(inplace=True),
        )
        aux_dim = cfg.aux_hidden if cfg.use_aux else 0
        blocks = []
        in_ch = chans[0]
        for i, out_ch in enumerate(chans):
            blocks.append(BasicBlock(in_ch, out_ch, stride=1 if i == 0 else 2,
                                     aux_dim=aux_dim))
            in_ch = out_ch
        self.blocks = nn.ModuleList(blocks)
        self.fc = nn.Linear(chans[-1], cfg.n_classes)
        if cfg.use_aux:
            layers: list[nn.Module] = [nn.Linear(cfg.aux_in, cfg.aux_hidden), nn.ReLU(inplace=True)]
            for _ in range(cfg.aux_layers - 1):
                layers += [nn.Linear(cfg.aux_hidden, cfg.aux_hidden), nn.ReLU(inplace=True)]
            self.aux_mlp = nn.Sequential(*layers)
        else:
            self.aux_mlp = None
        self._init_weights()

    def _init_weights(self) -> None:
        for m in self.modules():
            if isinstance(m, nn.Conv2d):
                nn.init.kaiming_uniform_(m.weight, nonlinearity="relu")
            elif isinstance(m, (nn.BatchNorm2d, nn.LayerNorm)):
                nn.init.ones_(m.weight)
                nn.init.zeros_(m.bias)

    def forward(self, x: torch.Tensor, aux: torch.Tensor | None = None) -> torch.Tensor:
        if x.ndim != 4 or tuple(x.shape[1:]) != tuple(self.cfg.input_shape):
            raise ShapeMismatch(
                f"expected batch of {self.cfg.input_shape}, got {tuple(x.shape)}"
            )
        embed = None
        if self.cfg.use_aux:
            if aux is None:
                raise ShapeMismatch("aux vector required but absent")
            if aux.ndim != 2 or aux.shape[1] != self.cfg.aux_in:
                raise ShapeMismatch(
                    f"aux must be (batch, {self.cfg.aux_in}), got {tuple(aux.shape)}"
                )
            embed = self.aux_mlp(aux)
        elif aux is not None:
            raise ShapeMismatch("aux vector given but the network has no aux path")
        out = self.stem(x)
        for block in self.blocks:
            out = block(out, embed)
        out = out.mean(dim=(2, 3))
        logits = self.fc(out)
        if not torch.isfinite(logits).all():
            raise NonFiniteActivation("non-finite logits")
        return logits

    def parameter_count(self) -> int:
        return sum(p.numel() for p in self.parameters())


def standardize_batch(x: torch.Tensor) -> torch.Tensor:
    """Per-tensor zero-mean unit-variance scaling across each sample."""
    dims = tuple(range(1, x.ndim))
    mean = x.mean(dim=dims, keepdim=True)
    std = x.std(dim=dims, keepdim=True, unbiased=False)
    return torch.where(std > 0, (x - mean) / std.clamp_min(1e-12), torch.zeros_like(x))


def build_network(cfg: NetworkConfig) -> VibWalkNet:
    """Construct the network with seeded, reproducible initialization."""
    torch.manual_seed(cfg.seed)
    return VibWalkNet(cfg)
