"""Fused compiled loops for whole-cube encode/decode in BIL coding order.

These mirror the scalar semantics in ``predictor``, ``quantizer`` and
``entropy`` exactly (verified bit-for-bit by tests); they exist because the
per-sample recursions cannot be vectorized. All integer state is int64;
bit I/O is MSB-first into preallocated byte buffers.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

ESCAPE_QUOTIENT = 32
ESCAPE_RAW_BITS = 32
K_MAX = 26
RESCALE_COUNT = 1 << 11
WEIGHT_FRAC_BITS = 13
WEIGHT_MIN = -(1 << 16)
WEIGHT_MAX = (1 << 16) - 1


@njit(cache=True, nogil=True, inline="always")
def _put_bit(buf, pos, bit):
    if bit:
        buf[pos >> 3] |= np.uint8(0x80) >> np.uint8(pos & 7)
    return pos + 1


@njit(cache=True, nogil=True, inline="always")
def _get_bit(buf, pos):
    return (buf[pos >> 3] >> (7 - (pos & 7))) & 1


@njit(cache=True, nogil=True, inline="always")
def _put_ones(buf, pos, q):
    # byte-chunked run of q one-bits
    while q > 0:
        off = pos & 7
        space = 8 - off
        chunk = q if q < space else space
        buf[pos >> 3] |= ((1 << chunk) - 1) << (space - chunk)
        pos += chunk
        q -= chunk
    return pos


@njit(cache=True, nogil=True, inline="always")
def _put_bits(buf, pos, value, n):
    # n low bits of value, MSB first, byte-chunked (buffer is pre-zeroed)
    while n > 0:
        off = pos & 7
        space = 8 - off
        chunk = n if n < space else space
        bits = (value >> (n - chunk)) & ((1 << chunk) - 1)
        buf[pos >> 3] |= bits << (space - chunk)
        pos += chunk
        n -= chunk
    return pos


@njit(cache=True, nogil=True, inline="always")
def _get_bits(buf, pos, n):
    value = np.int64(0)
    while n > 0:
        off = pos & 7
        space = 8 - off
        chunk = n if n < space else space
        bits = (buf[pos >> 3] >> (space - chunk)) & ((1 << chunk) - 1)
        value = (value << chunk) | bits
        pos += chunk
        n -= chunk
    return value, pos


@njit(cache=True, nogil=True)
def _emit_gpo2(buf, pos, u, k):
    q = u >> k
    if q >= ESCAPE_QUOTIENT:
        pos = _put_ones(buf, pos, ESCAPE_QUOTIENT)
        return _put_bits(buf, pos, u, ESCAPE_RAW_BITS)
    pos = _put_ones(buf, pos, q)
    pos += 1  # terminating zero (buffer is pre-zeroed)
    if k:
        pos = _put_bits(buf, pos, u & ((1 << k) - 1), k)
    return pos


@njit(cache=True, nogil=True)
def _read_gpo2(buf, pos, nbits, k):
    q = 0
    while q < ESCAPE_QUOTIENT:
        if pos >= nbits:
            raise ValueError("truncated bitstream payload")
        if _get_bit(buf, pos):
            q += 1
            pos += 1
        else:
            pos += 1
            break
    if q == ESCAPE_QUOTIENT:
        if pos + ESCAPE_RAW_BITS > nbits:
            raise ValueError("truncated bitstream payload")
        return _get_bits(buf, pos, ESCAPE_RAW_BITS)
    if pos + k > nbits:
        raise ValueError("truncated bitstream payload")
    if k == 0:
        return np.int64(q), pos
    low, pos = _get_bits(buf, pos, k)
    return (np.int64(q) << k) | low, pos


@njit(cache=True, nogil=True, inline="always")
def _adapt_k(total, count):
    k = 0
    while k < K_MAX and (count << k) < total:
        k += 1
    return k


@njit(cache=True, nogil=True)
def _local_sum(SR, z, y, x, nx, narrow, smid):
    if y > 0:
        if x == 0:
            if nx == 1:
                return 4 * SR[z, y - 1, 0]
            return 2 * (SR[z, y - 1, 0] + SR[z, y - 1, 1])
        if x == nx - 1:
            if narrow:
                return 2 * (SR[z, y - 1, x - 1] + SR[z, y - 1, x])
            return SR[z, y, x - 1] + SR[z, y - 1, x - 1] + 2 * SR[z, y - 1, x]
        if narrow:
            return SR[z, y - 1, x - 1] + 2 * SR[z, y - 1, x] + SR[z, y - 1, x + 1]
        return (SR[z, y, x - 1] + SR[z, y - 1, x - 1]
                + SR[z, y - 1, x] + SR[z, y - 1, x + 1])
    if x > 0:
        if narrow:
            if z == 0:
                return 4 * smid
            return 4 * SR[z - 1, y, x - 1]
        return 4 * SR[z, y, x - 1]
    if z > 0:
        return 4 * SR[z - 1, y, x]
    return 4 * smid


@njit(cache=True, nogil=True)
def _fill_diffs(diffs, SR, D, z, y, x, lsum, full, narrow, P):
    nd = 3 if full else 0
    if full:
        if y == 0:
            diffs[0] = 0
            diffs[1] = 0
            diffs[2] = 0
        else:
            north = SR[z, y - 1, x]
            diffs[0] = 4 * north - lsum
            if narrow or x == 0:
                diffs[1] = 4 * north - lsum
            else:
                diffs[1] = 4 * SR[z, y, x - 1] - lsum
            if x == 0:
                diffs[2] = 4 * north - lsum
            else:
                diffs[2] = 4 * SR[z, y - 1, x - 1] - lsum
    n_prev = min(z, P)
    for j in range(n_prev):
        diffs[nd + j] = D[z - 1 - j, x]
    return nd + n_prev


@njit(cache=True, nogil=True, inline="always")
def _predict(W, z, diffs, eff, lsum, smax):
    acc = np.int64(0)
    for i in range(eff):
        acc += W[z, i] * diffs[i]
    num = acc + (lsum << WEIGHT_FRAC_BITS)
    s_hat = (num + (1 << (WEIGHT_FRAC_BITS + 1))) >> (WEIGHT_FRAC_BITS + 2)
    if s_hat < 0:
        return np.int64(0)
    if s_hat > smax:
        return smax
    return s_hat


@njit(cache=True, nogil=True, inline="always")
def _update_weights(W, z, diffs, eff, sign, t, tinc, vmin, vmax):
    if sign == 0:
        return
    v = vmin + t // tinc
    if v > vmax:
        v = vmax
    for i in range(eff):
        w = W[z, i] + ((sign * diffs[i]) >> v)
        if w < WEIGHT_MIN:
            w = WEIGHT_MIN
        elif w > WEIGHT_MAX:
            w = WEIGHT_MAX
        W[z, i] = w


@njit(cache=True, nogil=True)
def _init_weights(nz, full, P):
    nd = 3 if full else 0
    W = np.zeros((nz, nd + P), dtype=np.int64)
    if P >= 1:
        W[:, nd] = (7 << WEIGHT_FRAC_BITS) // 8
    return W


@njit(cache=True, nogil=True)
def encode_cube(S, full, narrow, P, smid, smax, vmin, vmax, tinc,
                inloop, rel_mode, delta, r_eff, buf, SR):
    """Encode S (nz, ny, nx int64) in BIL order; fills SR, returns payload bits.

    inloop=False gives the lossless path (SR ends equal to S). With
    inloop=True residuals are quantized with step 2*delta+1 (rel_mode=False)
    or the per-pixel relative step (rel_mode=True) and locally decoded.
    """
    nz, ny, nx = S.shape
    W = _init_weights(nz, full, P)
    D = np.zeros((nz, nx), dtype=np.int64)
    diffs = np.zeros(W.shape[1] if W.shape[1] > 0 else 1, dtype=np.int64)
    gtotal = np.zeros(nz, dtype=np.int64)
    gcount = np.ones(nz, dtype=np.int64)
    pos = 0
    q_abs = 2 * delta + 1
    for y in range(ny):
        for z in range(nz):
            t = y * nx
            for x in range(nx):
                lsum = _local_sum(SR, z, y, x, nx, narrow, smid)
                eff = _fill_diffs(diffs, SR, D, z, y, x, lsum, full, narrow, P)
                s_hat = _predict(W, z, diffs, eff, lsum, smax)
                s = S[z, y, x]
                e = s - s_hat
                if inloop:
                    if rel_mode:
                        q = 2 * np.int64(math.floor(r_eff * s_hat)) + 1
                    else:
                        q = q_abs
                    mag = (abs(e) + (q - 1) // 2) // q
                    idx = mag if e >= 0 else -mag
                    srv = s_hat + idx * q
                    if srv < 0:
                        srv = 0
                    elif srv > smax:
                        srv = smax
                    coded = idx
                else:
                    srv = s
                    coded = e
                u = 2 * coded if coded >= 0 else -2 * coded - 1
                k = _adapt_k(gtotal[z], gcount[z])
                pos = _emit_gpo2(buf, pos, u, k)
                if y > 0 or x > 0:
                    gtotal[z] += u
                    gcount[z] += 1
                    if gcount[z] >= RESCALE_COUNT:
                        gtotal[z] >>= 1
                        gcount[z] >>= 1
                SR[z, y, x] = srv
                D[z, x] = 4 * srv - lsum
                sign = 1 if coded > 0 else (-1 if coded < 0 else 0)
                _update_weights(W, z, diffs, eff, sign, t + x, tinc, vmin, vmax)
    return pos


@njit(cache=True, nogil=True)
def decode_cube(buf, nbits, OUT, full, narrow, P, smid, smax, vmin, vmax,
                tinc, inloop, rel_mode, delta, r_eff):
    """Exact inverse of encode_cube; fills OUT, returns bits consumed."""
    nz, ny, nx = OUT.shape
    W = _init_weights(nz, full, P)
    D = np.zeros((nz, nx), dtype=np.int64)
    diffs = np.zeros(W.shape[1] if W.shape[1] > 0 else 1, dtype=np.int64)
    gtotal = np.zeros(nz, dtype=np.int64)
    gcount = np.ones(nz, dtype=np.int64)
    pos = 0
    q_abs = 2 * delta + 1
    for y in range(ny):
        for z in range(nz):
            t = y * nx
            for x in range(nx):
                lsum = _local_sum(OUT, z, y, x, nx, narrow, smid)
                eff = _fill_diffs(diffs, OUT, D, z, y, x, lsum, full, narrow, P)
                s_hat = _predict(W, z, diffs, eff, lsum, smax)
                k = _adapt_k(gtotal[z], gcount[z])
                u, pos = _read_gpo2(buf, pos, nbits, k)
                coded = (u >> 1) if u % 2 == 0 else -((u + 1) >> 1)
                if inloop:
                    if rel_mode:
                        q = 2 * np.int64(math.floor(r_eff * s_hat)) + 1
                    else:
                        q = q_abs
                    srv = s_hat + coded * q
                    if srv < 0:
                        srv = 0
                    elif srv > smax:
                        srv = smax
                else:
                    srv = s_hat + coded
                if y > 0 or x > 0:
                    gtotal[z] += u
                    gcount[z] += 1
                    if gcount[z] >= RESCALE_COUNT:
                        gtotal[z] >>= 1
                        gcount[z] >>= 1
                OUT[z, y, x] = srv
                D[z, x] = 4 * srv - lsum
                sign = 1 if coded > 0 else (-1 if coded < 0 else 0)
                _update_weights(W, z, diffs, eff, sign, t + x, tinc, vmin, vmax)
    return pos


@njit(cache=True, nogil=True)
def encode_precomputed(S, SIGMA, DN, DW, DNW, DALL, full, P, smax, vmin,
                       vmax, tinc, buf):
    """Lossless encode with neighborhood terms precomputed from the input.

    Valid only when prediction runs on original samples (lossless path):
    the local sums and differences then have no dependency on coding
    results and arrive here as whole-cube arrays. The serial loop keeps
    just the adaptive-weight and entropy-context recursions. Emits the
    same bitstream as encode_cube(inloop=False).
    """
    nz, ny, nx = S.shape
    W = _init_weights(nz, full, P)
    gtotal = np.zeros(nz, dtype=np.int64)
    gcount = np.ones(nz, dtype=np.int64)
    nd = 3 if full else 0
    pos = 0
    for y in range(ny):
        for z in range(nz):
            n_prev = min(z, P)
            t = y * nx
            for x in range(nx):
                lsum = SIGMA[z, y, x]
                acc = np.int64(0)
                if full:
                    acc += (W[z, 0] * DN[z, y, x] + W[z, 1] * DW[z, y, x]
                            + W[z, 2] * DNW[z, y, x])
                for j in range(n_prev):
                    acc += W[z, nd + j] * DALL[z - 1 - j, y, x]
                num = acc + (lsum << WEIGHT_FRAC_BITS)
                s_hat = (num + (1 << (WEIGHT_FRAC_BITS + 1))) >> (WEIGHT_FRAC_BITS + 2)
                if s_hat < 0:
                    s_hat = np.int64(0)
                elif s_hat > smax:
                    s_hat = smax
                e = S[z, y, x] - s_hat
                u = 2 * e if e >= 0 else -2 * e - 1
                k = _adapt_k(gtotal[z], gcount[z])
                pos = _emit_gpo2(buf, pos, u, k)
                if y > 0 or x > 0:
                    gtotal[z] += u
                    gcount[z] += 1
                    if gcount[z] >= RESCALE_COUNT:
                        gtotal[z] >>= 1
                        gcount[z] >>= 1
                if e != 0:
                    sign = 1 if e > 0 else -1
                    v = vmin + (t + x) // tinc
                    if v > vmax:
                        v = vmax
                    if full:
                        w0 = W[z, 0] + ((sign * DN[z, y, x]) >> v)
                        w1 = W[z, 1] + ((sign * DW[z, y, x]) >> v)
                        w2 = W[z, 2] + ((sign * DNW[z, y, x]) >> v)
                        W[z, 0] = min(max(w0, WEIGHT_MIN), WEIGHT_MAX)
                        W[z, 1] = min(max(w1, WEIGHT_MIN), WEIGHT_MAX)
                        W[z, 2] = min(max(w2, WEIGHT_MIN), WEIGHT_MAX)
                    for j in range(n_prev):
                        w = W[z, nd + j] + ((sign * DALL[z - 1 - j, y, x]) >> v)
                        W[z, nd + j] = min(max(w, WEIGHT_MIN), WEIGHT_MAX)
    return pos


@njit(cache=True, nogil=True)
def gpo2_encode_batch(us, k, buf):
    """Encode every value in us with a fixed k; returns total bits."""
    pos = 0
    for i in range(us.shape[0]):
        pos = _emit_gpo2(buf, pos, us[i], k)
    return pos


@njit(cache=True, nogil=True)
def gpo2_decode_batch(buf, nbits, n, k, out):
    """Decode n values written by gpo2_encode_batch; returns bits consumed."""
    pos = 0
    for i in range(n):
        u, pos = _read_gpo2(buf, pos, nbits, k)
        out[i] = u
    return pos
