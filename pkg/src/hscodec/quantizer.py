"""Quantization machinery shared by both compressor topologies.

Covers the uniform scalar quantizer (used both for raw-sample
prequantization and for in-loop residual coding), the per-pixel relative
step rule, and a greedy non-uniform codebook that guarantees a relative
error bound when quantizing raw samples. Bin geometry for consistent
reconstruction lives here too.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

MODES = ("lossless", "abs", "rel")


@dataclass(frozen=True)
class RelativeCodebook:
    """Left-to-right greedy interval partition of [0, max_value].

    Interval i covers [lowers[i], uppers[i]] and reconstructs to reps[i];
    every member v satisfies |v - reps[i]| <= r*v exactly (rational r).
    """

    lowers: np.ndarray
    reps: np.ndarray
    uppers: np.ndarray
    r_num: int
    r_den: int
    max_value: int

    @property
    def n_intervals(self) -> int:
        return int(self.lowers.size)

    def pairs(self) -> list[tuple[int, int]]:
        """(lower_edge, representative) pairs, the serialized form."""
        return [(int(l), int(r)) for l, r in zip(self.lowers, self.reps)]

    @classmethod
    def from_pairs(cls, pairs: list[tuple[int, int]], r_num: int, r_den: int,
                   max_value: int) -> "RelativeCodebook":
        lowers = np.array([p[0] for p in pairs], dtype=np.int64)
        reps = np.array([p[1] for p in pairs], dtype=np.int64)
        uppers = np.empty_like(lowers)
        uppers[:-1] = lowers[1:] - 1
        uppers[-1] = max_value
        return cls(lowers, reps, uppers, r_num, r_den, max_value)


@dataclass(frozen=True)
class QuantizerSpec:
    """Error-bound objective: absolute delta, relative fraction, or lossless.

    margin is an optional multiplier (<= 1) applied to r by the in-loop
    relative step rule; the nominal r is what reconstruction bins use.
    """

    mode: str
    delta: int = 0
    r: float = 0.0
    margin: float = 1.0
    codebook: RelativeCodebook | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.mode == "abs" and self.delta < 0:
            raise ValueError("delta must be >= 0")
        if self.mode == "rel" and not 0.0 < self.r < 1.0:
            raise ValueError("r must lie in (0, 1)")
        if not 0.0 < self.margin <= 1.0:
            raise ValueError("margin must lie in (0, 1]")

    @property
    def effective_r(self) -> float:
        return self.r * self.margin

    @classmethod
    def lossless(cls) -> "QuantizerSpec":
        return cls("lossless")

    @classmethod
    def absolute(cls, delta: int) -> "QuantizerSpec":
        return cls("abs", delta=delta)

    @classmethod
    def relative(cls, r: float, margin: float = 1.0,
                 codebook: RelativeCodebook | None = None) -> "QuantizerSpec":
        return cls("rel", r=r, margin=margin, codebook=codebook)


@dataclass(frozen=True)
class BinSpec:
    """Per-sample reconstruction bins [lo, hi] in digital numbers."""

    lo: np.ndarray
    hi: np.ndarray

    def contains(self, values: np.ndarray) -> np.ndarray:
        v = np.asarray(values, dtype=np.float64)
        return (v >= self.lo) & (v <= self.hi)


def uniform_quantize(v: int, delta: int, max_value: int = 65535) -> tuple[int, int]:
    """Midpoint uniform quantizer with step 2*delta+1; |v - recon| <= delta."""
    if v < 0:
        raise ValueError("sample values must be non-negative")
    if delta == 0:
        return v, v
    q = 2 * delta + 1
    index = (v + delta) // q
    recon = min(index * q, max_value)
    return index, recon


def uniform_quantize_array(vs: np.ndarray, delta: int,
                           max_value: int = 65535) -> tuple[np.ndarray, np.ndarray]:
    """Vector form of uniform_quantize."""
    vs = np.asarray(vs, dtype=np.int64)
    if delta == 0:
        return vs.copy(), vs.copy()
    q = 2 * delta + 1
    indices = (vs + delta) // q
    recons = np.minimum(indices * q, max_value)
    return indices, recons


def uniform_dequantize_array(indices: np.ndarray, delta: int,
                             max_value: int = 65535) -> np.ndarray:
    indices = np.asarray(indices, dtype=np.int64)
    if delta == 0:
        return indices.copy()
    return np.minimum(indices * (2 * delta + 1), max_value)


def inloop_quantize_residual(e: int, q: int) -> tuple[int, int]:
    """Quantize a signed residual with odd step q; |e - recon| <= (q-1)/2."""
    if q <= 0 or q % 2 == 0:
        raise ValueError(f"step must be odd positive, got {q}")
    mag = (abs(e) + (q - 1) // 2) // q
    index = mag if e >= 0 else -mag
    return index, index * q


def relative_step(s_hat: int, r: float) -> int:
    """Per-pixel step for the in-loop relative objective: 2*floor(r*|s_hat|)+1."""
    if s_hat < 0:
        raise ValueError("predicted sample must be non-negative")
    return 2 * math.floor(r * abs(s_hat)) + 1


def _ratio_of(r: float | str | Fraction) -> Fraction:
    # str() of a float yields its shortest decimal repr, i.e. the value the
    # caller wrote; this keeps the codebook bound exact for decimal targets.
    if isinstance(r, Fraction):
        return r
    return Fraction(str(r))


def codebook_interval(lower: int, r: float | str | Fraction) -> tuple[int, int]:
    """Greedy interval extension from a lower edge: (representative, upper).

    The representative floor(lower*(1+r)) is the largest value the lower
    edge tolerates; the upper edge is the largest v with v - rep <= r*v.
    Exact integer arithmetic.
    """
    ratio = _ratio_of(r)
    if not 0 < ratio < 1:
        raise ValueError(f"r must lie in (0, 1), got {ratio}")
    num, den = ratio.numerator, ratio.denominator
    rep = lower * (den + num) // den
    upper = rep * den // (den - num)
    return rep, upper


def build_relative_codebook(r: float | str | Fraction,
                            max_value: int = 65535) -> RelativeCodebook:
    """Left-to-right partition of [0, max_value] meeting |v - rep| <= r*v.

    Each interval is the greedy extension from the edge just above the
    previous interval (codebook_interval).
    """
    ratio = _ratio_of(r)
    if not 0 < ratio < 1:
        raise ValueError(f"r must lie in (0, 1), got {ratio}")

    lowers, reps, uppers = [], [], []
    lo = 0
    while lo <= max_value:
        rep, hi = codebook_interval(lo, ratio)
        hi = min(hi, max_value)
        lowers.append(lo)
        reps.append(rep)
        uppers.append(hi)
        lo = hi + 1
    num, den = ratio.numerator, ratio.denominator
    return RelativeCodebook(
        np.array(lowers, dtype=np.int64),
        np.array(reps, dtype=np.int64),
        np.array(uppers, dtype=np.int64),
        num, den, max_value,
    )


def codebook_quantize(v: int, codebook: RelativeCodebook) -> tuple[int, int]:
    """Locate the interval containing v; returns (index, representative)."""
    if v < 0 or v > codebook.max_value:
        raise ValueError(f"value {v} outside codebook range [0, {codebook.max_value}]")
    idx = int(np.searchsorted(codebook.lowers, v, side="right")) - 1
    return idx, int(codebook.reps[idx])


def codebook_quantize_array(vs: np.ndarray,
                            codebook: RelativeCodebook) -> tuple[np.ndarray, np.ndarray]:
    vs = np.asarray(vs, dtype=np.int64)
    if vs.size and (vs.min() < 0 or vs.max() > codebook.max_value):
        raise ValueError("values outside codebook range")
    indices = np.searchsorted(codebook.lowers, vs, side="right") - 1
    return indices, codebook.reps[indices]


def codebook_dequantize_array(indices: np.ndarray,
                              codebook: RelativeCodebook) -> np.ndarray:
    indices = np.asarray(indices, dtype=np.int64)
    if indices.size and (indices.min() < 0 or indices.max() >= codebook.n_intervals):
        raise ValueError("codebook index out of range")
    return codebook.reps[indices]


def bin_of(recon, spec: QuantizerSpec, max_value: int = 65535) -> BinSpec:
    """Reconstruction bin(s) for decoded value(s) under `spec`.

    Absolute mode: [recon-delta, recon+delta] clipped to the sample range.
    Relative with codebook: the interval owning the representative.
    Relative without codebook (in-loop): [recon*(1-r), recon*(1+r)].
    Lossless: degenerate [recon, recon].
    """
    recon = np.asarray(recon, dtype=np.float64)
    if spec.mode == "lossless" or (spec.mode == "abs" and spec.delta == 0):
        return BinSpec(recon.copy(), recon.copy())
    if spec.mode == "abs":
        lo = np.maximum(recon - spec.delta, 0.0)
        hi = np.minimum(recon + spec.delta, float(max_value))
        return BinSpec(lo, hi)
    if spec.codebook is not None:
        cb = spec.codebook
        idx = np.searchsorted(cb.reps, recon.astype(np.int64), side="left")
        idx = np.clip(idx, 0, cb.n_intervals - 1)
        if not np.array_equal(cb.reps[idx], recon.astype(np.int64)):
            raise ValueError("decoded value is not a codebook representative")
        return BinSpec(cb.lowers[idx].astype(np.float64),
                       cb.uppers[idx].astype(np.float64))
    lo = recon * (1.0 - spec.r)
    hi = np.minimum(recon * (1.0 + spec.r), float(max_value))
    return BinSpec(lo, hi)
