"""Slow, readable whole-cube coder built from the per-sample operations.

Used to verify the compiled loops in ``kernels``: both engines must emit
bit-identical payloads and reconstruct identical cubes. Only suitable for
small cubes.
"""

from __future__ import annotations

import numpy as np

from . import entropy
from .predictor import (
    PredictorConfig,
    central_difference,
    init_weights,
    local_differences,
    local_sum,
    neighborhood_at,
    predict,
    update_weights,
)
from .quantizer import inloop_quantize_residual, relative_step


def _sign(v: int) -> int:
    return 1 if v > 0 else (-1 if v < 0 else 0)


def encode_cube_ref(S: np.ndarray, cfg: PredictorConfig, smax: int,
                    tinc: int, inloop: bool, rel_mode: bool, delta: int,
                    r_eff: float) -> tuple[bytes, int, np.ndarray]:
    """Encode an (nz, ny, nx) int array in BIL order; returns (payload, bits, SR)."""
    nz, ny, nx = S.shape
    states = [init_weights(cfg, t_inc=tinc) for _ in range(nz)]
    contexts = [entropy.GolombContext() for _ in range(nz)]
    SR = np.zeros_like(S)
    D = np.zeros((nz, nx), dtype=np.int64)
    w = entropy.BitWriter()
    q_abs = 2 * delta + 1
    for y in range(ny):
        for z in range(nz):
            for x in range(nx):
                nbhd = neighborhood_at(SR, D, z, y, x, cfg)
                lsum = local_sum(nbhd, x, y, z, cfg)
                diffs = local_differences(nbhd, lsum, cfg)
                s_hat = predict(states[z], diffs, lsum, cfg, smax)
                s = int(S[z, y, x])
                e = s - s_hat
                if inloop:
                    q = relative_step(s_hat, r_eff) if rel_mode else q_abs
                    idx, rec = inloop_quantize_residual(e, q)
                    srv = min(max(s_hat + rec, 0), smax)
                    coded = idx
                else:
                    srv = s
                    coded = e
                u = entropy.map_residual(coded)
                k = entropy.adapt_k(contexts[z])
                entropy.gpo2_encode(u, k, w)
                if y > 0 or x > 0:  # band's first sample excluded from stats
                    contexts[z].update(u)
                SR[z, y, x] = srv
                D[z, x] = central_difference(srv, lsum)
                update_weights(states[z], _sign(coded), diffs, t=y * nx + x)
    return w.getvalue(), w.tell_bits(), SR


def decode_cube_ref(payload: bytes, nbits: int, shape: tuple[int, int, int],
                    cfg: PredictorConfig, smax: int, tinc: int, inloop: bool,
                    rel_mode: bool, delta: int, r_eff: float) -> np.ndarray:
    """Exact inverse of encode_cube_ref."""
    nz, ny, nx = shape
    states = [init_weights(cfg, t_inc=tinc) for _ in range(nz)]
    contexts = [entropy.GolombContext() for _ in range(nz)]
    OUT = np.zeros(shape, dtype=np.int64)
    D = np.zeros((nz, nx), dtype=np.int64)
    r = entropy.BitReader(payload, nbits)
    q_abs = 2 * delta + 1
    for y in range(ny):
        for z in range(nz):
            for x in range(nx):
                nbhd = neighborhood_at(OUT, D, z, y, x, cfg)
                lsum = local_sum(nbhd, x, y, z, cfg)
                diffs = local_differences(nbhd, lsum, cfg)
                s_hat = predict(states[z], diffs, lsum, cfg, smax)
                k = entropy.adapt_k(contexts[z])
                u = entropy.gpo2_decode(r, k)
                coded = entropy.unmap_residual(u)
                if inloop:
                    q = relative_step(s_hat, r_eff) if rel_mode else q_abs
                    srv = min(max(s_hat + coded * q, 0), smax)
                else:
                    srv = s_hat + coded
                if y > 0 or x > 0:
                    contexts[z].update(u)
                OUT[z, y, x] = srv
                D[z, x] = central_difference(srv, lsum)
                update_weights(states[z], _sign(coded), diffs, t=y * nx + x)
    return OUT
