"""Correction clipping: the consistency contract shared with the compressor.

A reconstructed sample must stay inside the quantization bin of its decoded
value: for a bounded absolute error the correction is clamped to
[-delta, +delta] (intersected with the sample range), for a bounded
relative error to [-r*decoded, +r*decoded]. clip_layer must match the
compressor package's clip_correction bit for bit on the shared vector file
(data/clip_vectors.csv at the repository root).
"""

from __future__ import annotations

import numpy as np


def clip_bounds(decoded: np.ndarray, mode: str, bound: float,
                max_value: int = 65535) -> tuple[np.ndarray, np.ndarray]:
    """Per-sample correction bounds (lo, hi) for decoded values."""
    decoded = np.asarray(decoded, dtype=np.float64)
    if mode == "abs":
        lo = np.maximum(decoded - bound, 0.0) - decoded
        hi = np.minimum(decoded + bound, float(max_value)) - decoded
    elif mode == "rel":
        lo = decoded * (1.0 - bound) - decoded
        hi = np.minimum(decoded * (1.0 + bound), float(max_value)) - decoded
    else:
        raise ValueError("mode must be 'abs' or 'rel'")
    return lo, hi


def clip_layer(E: np.ndarray, decoded: np.ndarray, mode: str, bound: float,
               max_value: int = 65535) -> np.ndarray:
    """Clamp a correction field into the per-sample bounds."""
    lo, hi = clip_bounds(decoded, mode, bound, max_value)
    return np.clip(np.asarray(E, dtype=np.float64), lo, hi)
