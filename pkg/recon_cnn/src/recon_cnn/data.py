"""Paired patch extraction from (original, decoded) cube files."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PATCH_SPATIAL = 32
PATCH_BANDS = 8


@dataclass(frozen=True)
class TrainSpec:
    """Training knobs; one model per (pipeline, quality point).

    Desk-scale defaults keep CI runnable; the original large-corpus recipe
    (lr 1e-8, 1000 epochs, 70000 patches) is reachable through the same
    fields.
    """

    mode: str                 # "abs" | "rel"
    bound: float              # delta in digital numbers, or r
    pipeline: str = "prequant"
    n_patches: int = 5000
    epochs: int = 30
    lr: float = 1e-4
    batch_size: int = 32
    val_fraction: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("abs", "rel"):
            raise ValueError("mode must be 'abs' or 'rel'")
        if self.n_patches < 1 or self.epochs < 1:
            raise ValueError("n_patches and epochs must be >= 1")
        if not 0.0 < self.val_fraction < 1.0:
            raise ValueError("val_fraction must lie in (0, 1)")


def extract_patches(orig: np.ndarray, decoded: np.ndarray, n_patches: int,
                    seed: int = 0) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Random aligned (decoded, original) patch pairs, 8 bands x 32 x 32.

    Returns (decoded_patches, orig_patches, offsets) with offsets recording
    (z, y, x) per patch; deterministic in seed.
    """
    if orig.shape != decoded.shape:
        raise ValueError(f"cube shapes differ: {orig.shape} vs {decoded.shape}")
    nz, ny, nx = orig.shape
    if nz < PATCH_BANDS or ny < PATCH_SPATIAL or nx < PATCH_SPATIAL:
        raise ValueError(
            f"cube {orig.shape} smaller than a "
            f"{PATCH_BANDS}x{PATCH_SPATIAL}x{PATCH_SPATIAL} patch")
    rng = np.random.default_rng(seed)
    zs = rng.integers(0, nz - PATCH_BANDS + 1, n_patches)
    ys = rng.integers(0, ny - PATCH_SPATIAL + 1, n_patches)
    xs = rng.integers(0, nx - PATCH_SPATIAL + 1, n_patches)
    dec_p = np.empty((n_patches, PATCH_BANDS, PATCH_SPATIAL, PATCH_SPATIAL),
                     dtype=np.float32)
    orig_p = np.empty_like(dec_p)
    for i, (z, y, x) in enumerate(zip(zs, ys, xs)):
        dec_p[i] = decoded[z:z + PATCH_BANDS, y:y + PATCH_SPATIAL,
                           x:x + PATCH_SPATIAL]
        orig_p[i] = orig[z:z + PATCH_BANDS, y:y + PATCH_SPATIAL,
                         x:x + PATCH_SPATIAL]
    offsets = np.stack([zs, ys, xs], axis=1)
    return dec_p, orig_p, offsets


def extract_patches_multi(pairs, n_patches: int, seed: int = 0):
    """Spread patch extraction evenly over several (orig, decoded) cubes."""
    pairs = list(pairs)
    per = [n_patches // len(pairs)] * len(pairs)
    per[0] += n_patches - sum(per)
    dec_all, orig_all = [], []
    for i, ((orig, decoded), count) in enumerate(zip(pairs, per)):
        dec_p, orig_p, _ = extract_patches(orig, decoded, count, seed + i)
        dec_all.append(dec_p)
        orig_all.append(orig_p)
    return np.concatenate(dec_all), np.concatenate(orig_all)
