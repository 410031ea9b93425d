"""Bit-exact bitstream I/O and adaptive Golomb power-of-2 residual coding.

Bit order is MSB-first within bytes; the final byte is zero-padded. The
GPO2 code writes a unary quotient (q ones, one zero) followed by the k low
bits of the value; quotients of 32 or more escape to a raw 32-bit word so
worst-case expansion stays bounded.
"""

from __future__ import annotations

from dataclasses import dataclass

ESCAPE_QUOTIENT = 32
ESCAPE_RAW_BITS = 32
K_MAX = 26
RESCALE_COUNT = 1 << 11


class BitWriter:
    """Append-only MSB-first bit sink."""

    def __init__(self):
        self._buf = bytearray()
        self._nbits = 0

    def write_bit(self, bit: int) -> None:
        byte, off = divmod(self._nbits, 8)
        if off == 0:
            self._buf.append(0)
        if bit:
            self._buf[byte] |= 0x80 >> off
        self._nbits += 1

    def write_bits(self, value: int, nbits: int) -> None:
        """Write the nbits low bits of value, most significant first."""
        for shift in range(nbits - 1, -1, -1):
            self.write_bit((value >> shift) & 1)

    def tell_bits(self) -> int:
        return self._nbits

    def getvalue(self) -> bytes:
        return bytes(self._buf)


class BitReader:
    """MSB-first bit source over a byte buffer."""

    def __init__(self, data: bytes, nbits: int | None = None):
        self._data = data
        self._nbits = len(data) * 8 if nbits is None else nbits
        self._pos = 0

    def read_bit(self) -> int:
        if self._pos >= self._nbits:
            raise ValueError("truncated bitstream")
        byte, off = divmod(self._pos, 8)
        self._pos += 1
        return (self._data[byte] >> (7 - off)) & 1

    def read_bits(self, nbits: int) -> int:
        value = 0
        for _ in range(nbits):
            value = (value << 1) | self.read_bit()
        return value

    def tell_bits(self) -> int:
        return self._pos


def map_residual(e: int) -> int:
    """Zigzag map signed residuals onto non-negative integers (bijective)."""
    return 2 * e if e >= 0 else -2 * e - 1


def unmap_residual(u: int) -> int:
    return (u >> 1) if u % 2 == 0 else -((u + 1) >> 1)


def gpo2_encode(u: int, k: int, w: BitWriter) -> None:
    """Emit u under the Golomb power-of-2 code with divisor 2**k."""
    if not 0 <= k <= K_MAX:
        raise ValueError(f"k must lie in [0, {K_MAX}], got {k}")
    q = u >> k
    if q >= ESCAPE_QUOTIENT:
        for _ in range(ESCAPE_QUOTIENT):
            w.write_bit(1)
        w.write_bits(u, ESCAPE_RAW_BITS)
        return
    for _ in range(q):
        w.write_bit(1)
    w.write_bit(0)
    if k:
        w.write_bits(u & ((1 << k) - 1), k)


def gpo2_decode(r: BitReader, k: int) -> int:
    """Exact inverse of gpo2_encode for the same k."""
    q = 0
    while q < ESCAPE_QUOTIENT and r.read_bit():
        q += 1
    if q == ESCAPE_QUOTIENT:
        return r.read_bits(ESCAPE_RAW_BITS)
    low = r.read_bits(k) if k else 0
    return (q << k) | low


def code_length(u: int, k: int) -> int:
    """Exact emitted bit count for gpo2_encode(u, k), escape included."""
    q = u >> k
    if q >= ESCAPE_QUOTIENT:
        return ESCAPE_QUOTIENT + ESCAPE_RAW_BITS
    return q + 1 + k


@dataclass
class GolombContext:
    """Running mapped-residual statistics driving the divisor choice.

    Starts from one virtual zero sample so the counters are positive from
    the first use. Callers exclude each band's first sample (a pure DC
    offset with no causal neighbors) from the statistics; one outlier
    there would otherwise inflate code lengths for thousands of samples.
    """

    total: int = 0
    count: int = 1
    rescale_count: int = RESCALE_COUNT

    def update(self, u: int) -> None:
        self.total += u
        self.count += 1
        if self.count >= self.rescale_count:
            self.total >>= 1
            self.count >>= 1


def adapt_k(ctx: GolombContext) -> int:
    """Smallest k with count * 2**k >= running sum, clamped to [0, K_MAX]."""
    k = 0
    while k < K_MAX and (ctx.count << k) < ctx.total:
        k += 1
    return k
