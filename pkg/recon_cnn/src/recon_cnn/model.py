"""Residual reconstruction network for 8-band cube slices.

Input and output are (N, 8, lines, columns) in [0, 1] (samples divided by
the full 16-bit range). The network estimates a clipped correction on top
of a global input-to-output skip:

    head: 64 filters of 3x3 spanning all 8 input bands
    two residual blocks of (conv, instance norm, leaky ReLU) pairs
    tail: 3x3 conv back to 8 bands, zero-initialized so the untrained
          network is exactly the identity
    clip: correction bounded per sample to +-delta (absolute mode) or
          +-r*input (relative mode)

The tail emits an O(1) signal that is scaled by the clip bound before the
clamp; this keeps gradients alive (a raw correction at the bound's tiny
normalized scale saturates the clamp within a few optimizer steps) without
changing the clipping semantics.
"""

from __future__ import annotations

from pathlib import Path

import torch
from torch import nn

SAMPLE_SCALE = 65535.0
LEAKY_SLOPE = 0.2
N_FILTERS = 64
N_BANDS = 8


class ResidualBlock(nn.Module):
    def __init__(self):
        super().__init__()
        self.seq = nn.Sequential(
            nn.Conv2d(N_FILTERS, N_FILTERS, 3, padding=1),
            nn.InstanceNorm2d(N_FILTERS),
            nn.LeakyReLU(LEAKY_SLOPE),
            nn.Conv2d(N_FILTERS, N_FILTERS, 3, padding=1),
            nn.InstanceNorm2d(N_FILTERS),
            nn.LeakyReLU(LEAKY_SLOPE),
        )

    def forward(self, x):
        return x + self.seq(x)


class ReconModel(nn.Module):
    """mode 'abs' with bound delta (digital numbers) or 'rel' with bound r."""

    def __init__(self, mode: str, bound: float):
        super().__init__()
        if mode not in ("abs", "rel"):
            raise ValueError("mode must be 'abs' or 'rel'")
        if bound < 0:
            raise ValueError("bound must be >= 0")
        self.mode = mode
        self.bound = float(bound)
        self.head = nn.Conv2d(N_BANDS, N_FILTERS, 3, padding=1)
        self.block1 = ResidualBlock()
        self.block2 = ResidualBlock()
        self.tail = nn.Conv2d(N_FILTERS, N_BANDS, 3, padding=1)
        nn.init.zeros_(self.tail.weight)
        nn.init.zeros_(self.tail.bias)

    def clip_scale(self, x: torch.Tensor) -> torch.Tensor:
        """Per-sample correction bound in normalized units."""
        if self.mode == "abs":
            return torch.full_like(x, self.bound / SAMPLE_SCALE)
        return self.bound * x

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        raw = self.tail(self.block2(self.block1(self.head(x))))
        correction = self.clip_scale(x) * torch.clamp(raw, -1.0, 1.0)
        return x + correction


def save_model(model: ReconModel, path: str | Path, pipeline: str,
               sensor: str = "", extra: dict | None = None) -> None:
    """Serialize with the (pipeline, quality point, sensor) key."""
    torch.save({
        "state_dict": model.state_dict(),
        "mode": model.mode,
        "bound": model.bound,
        "pipeline": pipeline,
        "sensor": sensor,
        "extra": extra or {},
    }, path)


def load_model(path: str | Path) -> tuple[ReconModel, dict]:
    blob = torch.load(path, map_location="cpu", weights_only=True)
    model = ReconModel(blob["mode"], blob["bound"])
    model.load_state_dict(blob["state_dict"])
    model.eval()
    meta = {k: blob[k] for k in ("mode", "bound", "pipeline", "sensor")}
    meta.update(blob.get("extra", {}))
    return model, meta
