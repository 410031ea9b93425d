"""Whole-cube reconstruction by sliding an 8-band window spectrally.

Every 8-band window (step one band) goes through the network; overlapping
outputs are averaged per band, weighted by how many windows contain it.
The clipping layer already bounds each window's correction; the merged
cube is integer-rounded and re-projected into the per-sample bins, so the
result is always consistent with what the compressor transmitted.
"""

from __future__ import annotations

import numpy as np
import torch

from .clip import clip_bounds
from .data import PATCH_BANDS
from .model import SAMPLE_SCALE, ReconModel


def window_counts(n_z: int, width: int = PATCH_BANDS) -> np.ndarray:
    """How many sliding windows contain each band."""
    counts = np.zeros(n_z, dtype=np.int64)
    for z0 in range(n_z - width + 1):
        counts[z0:z0 + width] += 1
    return counts


def reconstruct(decoded: np.ndarray, model: ReconModel,
                max_value: int = 65535, batch_windows: int = 4) -> np.ndarray:
    """Reconstruct a (nz, ny, nx) decoded cube; returns uint16 bands."""
    nz, ny, nx = decoded.shape
    if nz < PATCH_BANDS:
        raise ValueError(f"need at least {PATCH_BANDS} bands, got {nz}")
    dec_f = decoded.astype(np.float32) / SAMPLE_SCALE
    acc = np.zeros((nz, ny, nx), dtype=np.float64)
    starts = list(range(nz - PATCH_BANDS + 1))
    model.eval()
    with torch.no_grad():
        for i in range(0, len(starts), batch_windows):
            chunk = starts[i:i + batch_windows]
            batch = np.stack([dec_f[z0:z0 + PATCH_BANDS] for z0 in chunk])
            out = model(torch.from_numpy(batch)).numpy().astype(np.float64)
            for j, z0 in enumerate(chunk):
                acc[z0:z0 + PATCH_BANDS] += out[j]
    counts = window_counts(nz)
    merged = acc / counts[:, None, None] * SAMPLE_SCALE

    lo, hi = clip_bounds(decoded.astype(np.float64), model.mode, model.bound,
                         max_value)
    dec64 = decoded.astype(np.float64)
    projected = np.clip(np.rint(merged), np.ceil(dec64 + lo),
                        np.floor(dec64 + hi))
    return np.clip(projected, 0, max_value).astype(np.uint16)
