"""Compressor topologies and the .hsc bitstream container.

Three pipelines share one BIL predictive coding engine:

* lossless  — residuals coded exactly; decode is bit-exact.
* inloop    — residuals quantized inside the prediction loop and locally
              decoded (best rate-distortion, serial data dependencies).
* prequant  — raw samples quantized up front, then the lossless engine
              runs on the index cube (dependency-light, slightly worse RD).

Container layout: fixed little-endian header (magic "HSC1"), optional
relative codebook, then the byte-aligned GPO2 payload. Rate accounting
uses payload bits only.
"""

from __future__ import annotations

import struct
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import kernels, reference
from .cube import ImageCube
from .predictor import V_MAX, V_MIN, WEIGHT_FRAC_BITS, PredictorConfig
from .quantizer import (
    QuantizerSpec,
    RelativeCodebook,
    build_relative_codebook,
    codebook_dequantize_array,
    codebook_quantize_array,
    uniform_dequantize_array,
)

MAGIC = b"HSC1"
VERSION = 1
PIPELINES = ("lossless", "inloop", "prequant")

_PIPE_CODE = {"lossless": 0, "inloop": 1, "prequant": 2}
_PIPE_NAME = {v: k for k, v in _PIPE_CODE.items()}
_QMODE_CODE = {"lossless": 0, "abs": 1, "rel": 2}
_QMODE_NAME = {v: k for k, v in _QMODE_CODE.items()}

# magic, version, pipeline, pred_mode, local_sum, p_bands, weight_frac,
# vmin, vmax, t_inc, escape_q, rescale_log2, nx, ny, nz, bit_depth, order,
# coded_bit_depth, qmode, delta, r, margin, has_codebook
_HEADER_FMT = "<4sBBBBBBBBIBBIIIBBBBHddB"
_HEADER_SIZE = struct.calcsize(_HEADER_FMT)


@dataclass(frozen=True)
class CodecConfig:
    """Pipeline selection plus predictor/quantizer setup.

    Only BIL coding order is implemented; cubes in other storage orders are
    reordered on ingest and restored on decode.
    """

    pipeline: str = "lossless"
    predictor: PredictorConfig = field(default_factory=PredictorConfig)
    quant: QuantizerSpec | None = None
    coding_order: str = "BIL"

    def __post_init__(self):
        if self.pipeline not in PIPELINES:
            raise ValueError(f"pipeline must be one of {PIPELINES}")
        if self.coding_order != "BIL":
            raise ValueError("only BIL coding order is implemented")
        if self.pipeline == "lossless":
            if self.quant is not None and self.quant.mode != "lossless":
                raise ValueError("lossless pipeline carries no quantizer spec")
        else:
            if self.quant is None or self.quant.mode == "lossless":
                raise ValueError(f"{self.pipeline} pipeline requires a quantizer spec")


@dataclass(frozen=True)
class Bitstream:
    """Decodable unit: header fields plus the GPO2 payload."""

    pipeline: str
    predictor: PredictorConfig
    quant: QuantizerSpec | None
    n_x: int
    n_y: int
    n_z: int
    bit_depth: int
    order: str
    coded_bit_depth: int
    t_inc: int
    payload_bits: int
    payload: bytes

    @property
    def n_samples(self) -> int:
        return self.n_x * self.n_y * self.n_z

    @property
    def rate_bpp(self) -> float:
        return self.payload_bits / self.n_samples

    def to_bytes(self) -> bytes:
        q = self.quant
        qmode = "lossless" if q is None else q.mode
        delta = q.delta if q is not None else 0
        r = q.r if q is not None else 0.0
        margin = q.margin if q is not None else 1.0
        codebook = q.codebook if q is not None else None
        head = struct.pack(
            _HEADER_FMT, MAGIC, VERSION,
            _PIPE_CODE[self.pipeline],
            1 if self.predictor.mode == "full" else 0,
            1 if self.predictor.local_sum == "narrow" else 0,
            self.predictor.p_bands,
            WEIGHT_FRAC_BITS, V_MIN, V_MAX, self.t_inc,
            kernels.ESCAPE_QUOTIENT, 11,
            self.n_x, self.n_y, self.n_z,
            self.bit_depth,
            0 if self.order == "BSQ" else 1,
            self.coded_bit_depth,
            _QMODE_CODE[qmode], delta, r, margin,
            1 if codebook is not None else 0,
        )
        parts = [head]
        if codebook is not None:
            parts.append(struct.pack("<IiiI", codebook.n_intervals,
                                     codebook.r_num, codebook.r_den,
                                     codebook.max_value))
            entries = np.empty(2 * codebook.n_intervals, dtype="<u4")
            entries[0::2] = codebook.lowers
            entries[1::2] = codebook.reps
            parts.append(entries.tobytes())
        parts.append(struct.pack("<Q", self.payload_bits))
        parts.append(self.payload)
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, data: bytes) -> "Bitstream":
        if len(data) < _HEADER_SIZE:
            raise ValueError("corrupt header: too short")
        (magic, version, pipe, pred_mode, lsum, p_bands, wfrac, vmin, vmax,
         t_inc, escape_q, rescale_log2, nx, ny, nz, bit_depth, order_code,
         coded_bd, qmode_code, delta, r, margin, has_cb) = struct.unpack(
            _HEADER_FMT, data[:_HEADER_SIZE])
        if magic != MAGIC:
            raise ValueError(f"corrupt header: bad magic {magic!r}")
        if version != VERSION:
            raise ValueError(f"unsupported container version {version}")
        if (wfrac, vmin, vmax) != (WEIGHT_FRAC_BITS, V_MIN, V_MAX):
            raise ValueError("unsupported coding parameters in header")
        if escape_q != kernels.ESCAPE_QUOTIENT or rescale_log2 != 11:
            raise ValueError("unsupported entropy parameters in header")
        off = _HEADER_SIZE
        codebook = None
        if has_cb:
            if len(data) < off + 16:
                raise ValueError("corrupt header: truncated codebook")
            n_int, r_num, r_den, cb_max = struct.unpack_from("<IiiI", data, off)
            off += 16
            nbytes = 8 * n_int
            if len(data) < off + nbytes:
                raise ValueError("corrupt header: truncated codebook")
            entries = np.frombuffer(data, dtype="<u4", count=2 * n_int, offset=off)
            off += nbytes
            pairs = list(zip(entries[0::2].tolist(), entries[1::2].tolist()))
            codebook = RelativeCodebook.from_pairs(pairs, r_num, r_den, cb_max)
        if len(data) < off + 8:
            raise ValueError("corrupt header: missing payload length")
        (payload_bits,) = struct.unpack_from("<Q", data, off)
        off += 8
        payload = data[off:]
        if len(payload) < (payload_bits + 7) // 8:
            raise ValueError(
                f"truncated payload: have {len(payload)} bytes, "
                f"need {(payload_bits + 7) // 8}"
            )
        qmode = _QMODE_NAME[qmode_code]
        quant = None
        if qmode == "abs":
            quant = QuantizerSpec.absolute(delta)
        elif qmode == "rel":
            quant = QuantizerSpec.relative(r, margin=margin, codebook=codebook)
        pred = PredictorConfig(mode="full" if pred_mode else "reduced",
                               local_sum="narrow" if lsum else "wide",
                               p_bands=p_bands,
                               s_mid=1 << (coded_bd - 1))
        return cls(pipeline=_PIPE_NAME[pipe], predictor=pred, quant=quant,
                   n_x=nx, n_y=ny, n_z=nz, bit_depth=bit_depth,
                   order="BSQ" if order_code == 0 else "BIL",
                   coded_bit_depth=coded_bd, t_inc=t_inc,
                   payload_bits=payload_bits, payload=payload)

    def write(self, path: str | Path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def read(cls, path: str | Path) -> "Bitstream":
        return cls.from_bytes(Path(path).read_bytes())


def _predictor_for(cfg: CodecConfig, coded_bit_depth: int) -> PredictorConfig:
    return replace(cfg.predictor, s_mid=1 << (coded_bit_depth - 1))


def _precompute_neighborhood_terms(S: np.ndarray, pred: PredictorConfig):
    """Whole-cube local sums and differences from original samples.

    Only the lossless path may use this: its prediction neighborhoods never
    depend on coding results, which is exactly why that pipeline is fast.
    """
    nz, ny, nx = S.shape
    smid = pred.s_mid
    narrow = pred.local_sum == "narrow"
    sigma = np.empty_like(S)
    if narrow:
        if ny > 1:
            if nx == 1:
                sigma[:, 1:, 0] = 4 * S[:, :-1, 0]
            else:
                sigma[:, 1:, 1:-1] = (S[:, :-1, :-2] + 2 * S[:, :-1, 1:-1]
                                      + S[:, :-1, 2:])
                sigma[:, 1:, 0] = 2 * (S[:, :-1, 0] + S[:, :-1, 1])
                sigma[:, 1:, -1] = 2 * (S[:, :-1, -2] + S[:, :-1, -1])
        if nx > 1:
            sigma[0, 0, 1:] = 4 * smid
            if nz > 1:
                sigma[1:, 0, 1:] = 4 * S[:-1, 0, :-1]
    else:
        if ny > 1:
            if nx == 1:
                sigma[:, 1:, 0] = 4 * S[:, :-1, 0]
            else:
                sigma[:, 1:, 1:-1] = (S[:, 1:, :-2] + S[:, :-1, :-2]
                                      + S[:, :-1, 1:-1] + S[:, :-1, 2:])
                sigma[:, 1:, 0] = 2 * (S[:, :-1, 0] + S[:, :-1, 1])
                sigma[:, 1:, -1] = (S[:, 1:, -2] + S[:, :-1, -2]
                                    + 2 * S[:, :-1, -1])
        if nx > 1:
            sigma[:, 0, 1:] = 4 * S[:, 0, :-1]
    sigma[0, 0, 0] = 4 * smid
    if nz > 1:
        sigma[1:, 0, 0] = 4 * S[:-1, 0, 0]

    d_all = 4 * S - sigma
    if pred.mode != "full":
        empty = np.zeros((0, 0, 0), dtype=S.dtype)
        return sigma, empty, empty, empty, d_all

    d_n = np.zeros_like(S)
    d_w = np.zeros_like(S)
    d_nw = np.zeros_like(S)
    if ny > 1:
        north = 4 * S[:, :-1, :] - sigma[:, 1:, :]
        d_n[:, 1:, :] = north
        d_w[:, 1:, :] = north
        d_nw[:, 1:, :] = north
        if nx > 1:
            if not narrow:
                d_w[:, 1:, 1:] = 4 * S[:, 1:, :-1] - sigma[:, 1:, 1:]
            d_nw[:, 1:, 1:] = 4 * S[:, :-1, :-1] - sigma[:, 1:, 1:]
    return sigma, d_n, d_w, d_nw, d_all


def _run_encode(bands: np.ndarray, pred: PredictorConfig, smax: int,
                t_inc: int, inloop: bool, rel_mode: bool, delta: int,
                r_eff: float, engine: str) -> tuple[bytes, int, np.ndarray]:
    if engine == "reference":
        return reference.encode_cube_ref(bands, pred, smax, t_inc, inloop,
                                         rel_mode, delta, r_eff)
    buf = np.zeros(bands.size * 8 + 64, dtype=np.uint8)
    if not inloop:
        sigma, d_n, d_w, d_nw, d_all = _precompute_neighborhood_terms(bands, pred)
        nbits = kernels.encode_precomputed(bands, sigma, d_n, d_w, d_nw,
                                           d_all, pred.mode == "full",
                                           pred.p_bands, smax, V_MIN, V_MAX,
                                           t_inc, buf)
        return buf[:(nbits + 7) // 8].tobytes(), int(nbits), bands
    SR = np.zeros_like(bands)
    nbits = kernels.encode_cube(bands, pred.mode == "full",
                                pred.local_sum == "narrow", pred.p_bands,
                                pred.s_mid, smax, V_MIN, V_MAX, t_inc,
                                inloop, rel_mode, delta, r_eff, buf, SR)
    return buf[:(nbits + 7) // 8].tobytes(), int(nbits), SR


def _run_decode(payload: bytes, nbits: int, shape: tuple[int, int, int],
                pred: PredictorConfig, smax: int, t_inc: int, inloop: bool,
                rel_mode: bool, delta: int, r_eff: float,
                engine: str) -> np.ndarray:
    if engine == "reference":
        return reference.decode_cube_ref(payload, nbits, shape, pred, smax,
                                         t_inc, inloop, rel_mode, delta, r_eff)
    OUT = np.zeros(shape, dtype=np.int64)
    buf = np.frombuffer(payload, dtype=np.uint8)
    consumed = kernels.decode_cube(buf, nbits, OUT, pred.mode == "full",
                                   pred.local_sum == "narrow", pred.p_bands,
                                   pred.s_mid, smax, V_MIN, V_MAX, t_inc,
                                   inloop, rel_mode, delta, r_eff)
    if consumed != nbits:
        raise ValueError(f"payload bit count mismatch: header says {nbits}, "
                         f"decoder consumed {consumed}")
    return OUT


def encode_lossless(cube: ImageCube, cfg: CodecConfig | None = None,
                    engine: str = "kernel") -> Bitstream:
    """Exact predictive coding; decode(bs) reproduces the cube sample-exact."""
    cfg = cfg or CodecConfig("lossless")
    bands = cube.as_bands().astype(np.int64)
    pred = _predictor_for(cfg, cube.bit_depth)
    t_inc = 4 * cube.n_x
    payload, nbits, _ = _run_encode(bands, pred, cube.max_value, t_inc,
                                    False, False, 0, 0.0, engine)
    return Bitstream("lossless", pred, None, cube.n_x, cube.n_y, cube.n_z,
                     cube.bit_depth, cube.order, cube.bit_depth, t_inc,
                     nbits, payload)


def encode_inloop(cube: ImageCube, cfg: CodecConfig, engine: str = "kernel",
                  return_trace: bool = False):
    """Near-lossless coding with the quantizer inside the prediction loop.

    With return_trace=True also returns the encoder's reconstructed cube,
    which decode() must reproduce exactly.
    """
    if cfg.quant is None:
        raise ValueError("inloop pipeline requires a quantizer spec")
    quant = cfg.quant
    bands = cube.as_bands().astype(np.int64)
    pred = _predictor_for(cfg, cube.bit_depth)
    t_inc = 4 * cube.n_x
    rel_mode = quant.mode == "rel"
    r_eff = quant.effective_r if rel_mode else 0.0
    payload, nbits, SR = _run_encode(bands, pred, cube.max_value, t_inc,
                                     True, rel_mode, quant.delta, r_eff,
                                     engine)
    bs = Bitstream("inloop", pred, quant, cube.n_x, cube.n_y, cube.n_z,
                   cube.bit_depth, cube.order, cube.bit_depth, t_inc,
                   nbits, payload)
    if return_trace:
        trace = ImageCube.from_bands(SR.astype(np.uint16), cube.bit_depth,
                                     cube.order)
        return bs, trace
    return bs


def _prequant_indices(bands: np.ndarray, max_value: int, quant: QuantizerSpec):
    """Quantize raw samples to bin indices; returns (index bands, spec, coded_bd)."""
    if quant.mode == "abs":
        if quant.delta:
            indices = (bands + quant.delta) // (2 * quant.delta + 1)
            max_index = (max_value + quant.delta) // (2 * quant.delta + 1)
        else:
            indices = bands
            max_index = max_value
    else:
        codebook = quant.codebook
        if codebook is None or codebook.max_value != max_value:
            codebook = build_relative_codebook(quant.r, max_value)
            quant = replace(quant, codebook=codebook)
        indices, _ = codebook_quantize_array(bands, codebook)
        max_index = codebook.n_intervals - 1
    coded_bd = max(2, int(max_index).bit_length())
    return np.ascontiguousarray(indices), quant, coded_bd


def encode_prequant(cube: ImageCube, cfg: CodecConfig,
                    engine: str = "kernel") -> Bitstream:
    """Quantize raw samples, then run the lossless engine on the index cube."""
    if cfg.quant is None:
        raise ValueError("prequant pipeline requires a quantizer spec")
    bands = cube.as_bands().astype(np.int64)
    indices, quant, coded_bd = _prequant_indices(bands, cube.max_value, cfg.quant)
    pred = _predictor_for(cfg, coded_bd)
    t_inc = 4 * cube.n_x
    payload, nbits, _ = _run_encode(indices, pred, (1 << coded_bd) - 1, t_inc,
                                    False, False, 0, 0.0, engine)
    return Bitstream("prequant", pred, quant, cube.n_x, cube.n_y, cube.n_z,
                     cube.bit_depth, cube.order, coded_bd, t_inc,
                     nbits, payload)


def encode(cube: ImageCube, cfg: CodecConfig, engine: str = "kernel") -> Bitstream:
    if cfg.pipeline == "lossless":
        return encode_lossless(cube, cfg, engine)
    if cfg.pipeline == "inloop":
        return encode_inloop(cube, cfg, engine)
    return encode_prequant(cube, cfg, engine)


def decode(bs: Bitstream, engine: str = "kernel") -> ImageCube:
    """Pipeline-appropriate inverse; returns the reconstructed cube."""
    shape = (bs.n_z, bs.n_y, bs.n_x)
    smax_coded = (1 << bs.coded_bit_depth) - 1
    inloop = bs.pipeline == "inloop"
    rel_mode = inloop and bs.quant is not None and bs.quant.mode == "rel"
    delta = bs.quant.delta if (inloop and bs.quant.mode == "abs") else 0
    r_eff = bs.quant.effective_r if rel_mode else 0.0
    OUT = _run_decode(bs.payload, bs.payload_bits, shape, bs.predictor,
                      smax_coded, bs.t_inc, inloop, rel_mode, delta, r_eff,
                      engine)
    if bs.pipeline == "prequant":
        q = bs.quant
        if q.mode == "abs":
            max_value = (1 << bs.bit_depth) - 1
            flat = uniform_dequantize_array(OUT.reshape(-1), q.delta, max_value)
            OUT = flat.reshape(shape)
        else:
            OUT = codebook_dequantize_array(OUT, q.codebook)
    return ImageCube.from_bands(OUT.astype(np.uint16), bs.bit_depth, bs.order)


@dataclass(frozen=True)
class ThroughputResult:
    encode_sps: float
    decode_sps: float
    rate_bpp: float
    n_samples: int
    repetitions: int


def bench_throughput(cube: ImageCube, cfg: CodecConfig,
                     repetitions: int = 5) -> ThroughputResult:
    """Median wall-clock samples/s over a fixed workload, encode and decode."""
    if repetitions < 3:
        raise ValueError("repetitions must be >= 3")
    bs = encode(cube, cfg)  # warm compile caches before timing
    enc_times, dec_times = [], []
    for _ in range(repetitions):
        t0 = time.perf_counter()
        bs = encode(cube, cfg)
        enc_times.append(time.perf_counter() - t0)
        t0 = time.perf_counter()
        decode(bs)
        dec_times.append(time.perf_counter() - t0)
    n = cube.n_samples
    return ThroughputResult(
        encode_sps=n / float(np.median(enc_times)),
        decode_sps=n / float(np.median(dec_times)),
        rate_bpp=bs.rate_bpp,
        n_samples=n,
        repetitions=repetitions,
    )
