"""Spectral-encoder inverse model: FNO layers, conv downsampler, MLP head.

The encoder lifts the input channels pointwise, applies spectral convolution
layers (kept Fourier modes per spatial dimension), and hands the activation
map to a convolutional downsampler (kernel 3, stride 1, padding 2, ReLU,
max-pool 2, repeated four times) followed by a small MLP that regresses the
scalar parameter. For spatial coefficient targets the downsampler is replaced
by an identity and the head by pointwise convolutions with a sigmoid
segmentation output.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn


@dataclass(frozen=True)
class FnoLiteConfig:
    in_channels: int
    resolution: tuple[int, ...]
    n_layers: int = 4
    n_modes: int = 16
    hidden_channels: int = 64
    mlp_hidden: int = 64
    n_downsample: int = 4
    output: str = "scalar"  # "scalar" | "map"

    def __post_init__(self):
        for n in self.resolution:
            if self.n_modes > n // 2:
                raise ValueError(
                    f"n_modes {self.n_modes} exceeds resolution {n} / 2"
                )
        if self.output not in ("scalar", "map"):
            raise ValueError(f"unknown output kind {self.output!r}")


class SpectralConv1d(nn.Module):
    def __init__(self, channels: int, modes: int):
        super().__init__()
        self.modes = modes
        scale = 1.0 / channels
        self.weight = nn.Parameter(
            scale * torch.randn(channels, channels, modes, dtype=torch.cfloat)
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        n = x.shape[-1]
        xh = torch.fft.rfft(x)
        out = torch.zeros_like(xh)
        out[..., : self.modes] = torch.einsum(
            "bim,iom->bom", xh[..., : self.modes], self.weight
        )
        return torch.fft.irfft(out, n=n)


class SpectralConv2d(nn.Module):
    def __init__(self, channels: int, modes: int):
        super().__init__()
        self.modes = modes
        scale = 1.0 / channels
        self.w_pos = nn.Parameter(
            scale * torch.randn(channels, channels, modes, modes, dtype=torch.cfloat)
        )
        self.w_neg = nn.Parameter(
            scale * torch.randn(channels, channels, modes, modes, dtype=torch.cfloat)
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        nx, ny = x.shape[-2:]
        xh = torch.fft.rfft2(x)
        out = torch.zeros_like(xh)
        m = self.modes
        out[..., :m, :m] = torch.einsum("bixy,ioxy->boxy", xh[..., :m, :m], self.w_pos)
        out[..., -m:, :m] = torch.einsum("bixy,ioxy->boxy", xh[..., -m:, :m], self.w_neg)
        return torch.fft.irfft2(out, s=(nx, ny))


class FnoLite(nn.Module):
    def __init__(self, config: FnoLiteConfig):
        super().__init__()
        self.config = config
        ndims = len(config.resolution)
        conv = nn.Conv1d if ndims == 1 else nn.Conv2d
        pool = nn.MaxPool1d if ndims == 1 else nn.MaxPool2d
        spectral = SpectralConv1d if ndims == 1 else SpectralConv2d

        self.lift = conv(config.in_channels, config.hidden_channels, 1)
        self.spectral_layers = nn.ModuleList(
            spectral(config.hidden_channels, config.n_modes)
            for _ in range(config.n_layers)
        )
        self.pointwise_layers = nn.ModuleList(
            conv(config.hidden_channels, config.hidden_channels, 1)
            for _ in range(config.n_layers)
        )

        if config.output == "scalar":
            stages = []
            for _ in range(config.n_downsample):
                stages += [
                    conv(config.hidden_channels, config.hidden_channels, 3,
                         stride=1, padding=2),
                    nn.ReLU(),
                    pool(2),
                ]
            self.downsampler = nn.Sequential(*stages)
            with torch.no_grad():
                probe = torch.zeros(1, config.in_channels, *config.resolution)
                flat = self.downsampler(self.lift(probe)).flatten(1).shape[1]
            self.head = nn.Sequential(
                nn.Flatten(1),
                nn.Linear(flat, config.mlp_hidden),
                nn.ReLU(),
                nn.Linear(config.mlp_hidden, 1),
            )
        else:
            self.downsampler = nn.Identity()
            self.head = nn.Sequential(
                conv(config.hidden_channels, config.mlp_hidden, 1),
                nn.ReLU(),
                conv(config.mlp_hidden, config.mlp_hidden, 1),
                nn.ReLU(),
                conv(config.mlp_hidden, 1, 1),
            )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        v = self.lift(x)
        for spec, point in zip(self.spectral_layers, self.pointwise_layers):
            v = torch.nn.functional.gelu(spec(v) + point(v))
        v = self.downsampler(v)
        out = self.head(v)
        if self.config.output == "scalar":
            return out.squeeze(-1)
        return torch.sigmoid(out.squeeze(1))

    def segmentation_map(self, x: torch.Tensor,
                         levels: tuple[float, float] = (3.0, 12.0)) -> torch.Tensor:
        """Binary coefficient map from the sigmoid output (map head only)."""
        if self.config.output != "map":
            raise ValueError("segmentation_map needs the map output head")
        probs = self.forward(x)
        return torch.where(probs >= 0.5,
                           torch.tensor(levels[1]), torch.tensor(levels[0]))
