import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hscodec.codec import (
    Bitstream,
    CodecConfig,
    bench_throughput,
    decode,
    encode,
    encode_inloop,
    encode_lossless,
    encode_prequant,
)
from hscodec.cube import ImageCube, SynthesisParams, reorder, synthesize_cube
from hscodec.metrics import snr
from hscodec.predictor import PredictorConfig
from hscodec.quantizer import QuantizerSpec

ALL_PREDICTORS = [PredictorConfig(mode=m, local_sum=ls)
                  for m in ("full", "reduced") for ls in ("wide", "narrow")]


def small_cube(seed=3):
    return synthesize_cube(SynthesisParams(
        9, 7, 5, seed=seed, spatial_corr_len=2.0, spectral_corr=0.9,
        mean_level=30000, dynamic_range=20000))


class TestEngineEquivalence:
    """The compiled loops and the per-sample reference must agree bit-exactly."""

    @pytest.mark.parametrize("pred", ALL_PREDICTORS,
                             ids=lambda p: f"{p.mode}-{p.local_sum}")
    @pytest.mark.parametrize("pipeline,quant", [
        ("lossless", None),
        ("inloop", QuantizerSpec.absolute(2)),
        ("inloop", QuantizerSpec.relative(0.01)),
        ("prequant", QuantizerSpec.absolute(3)),
        ("prequant", QuantizerSpec.relative(0.01)),
    ], ids=["lossless", "inloop-abs", "inloop-rel", "prequant-abs",
            "prequant-rel"])
    def test_bit_identical_streams_and_decodes(self, pred, pipeline, quant):
        cube = small_cube()
        cfg = CodecConfig(pipeline=pipeline, predictor=pred, quant=quant)
        bs_k = encode(cube, cfg, engine="kernel")
        bs_r = encode(cube, cfg, engine="reference")
        assert bs_k.payload == bs_r.payload
        assert bs_k.payload_bits == bs_r.payload_bits
        dec_k = decode(bs_k, engine="kernel")
        dec_r = decode(bs_r, engine="reference")
        assert np.array_equal(dec_k.samples, dec_r.samples)


class TestLossless:
    @pytest.mark.parametrize("pred", ALL_PREDICTORS,
                             ids=lambda p: f"{p.mode}-{p.local_sum}")
    def test_roundtrip_identity(self, pred, smooth_cube):
        bs = encode_lossless(smooth_cube, CodecConfig("lossless", predictor=pred))
        assert decode(bs).equals(smooth_cube)

    def test_roundtrip_bil_storage_order(self, smooth_cube):
        cube = reorder(smooth_cube, "BIL")
        out = decode(encode_lossless(cube))
        assert out.order == "BIL"
        assert out.equals(cube)

    def test_constant_cube_rate_near_one_bpp(self):
        cube = ImageCube(np.full(32 * 32 * 8, 777, dtype=np.uint16), 32, 32, 8)
        bs = encode_lossless(cube)
        assert bs.rate_bpp < 1.1
        assert decode(bs).equals(cube)

    def test_correlated_cube_compresses_below_60_percent(self):
        cube = synthesize_cube(SynthesisParams(
            64, 64, 16, seed=7, spatial_corr_len=4.0, spectral_corr=0.95,
            mean_level=20000, dynamic_range=16000))
        bs = encode_lossless(cube)
        assert bs.rate_bpp / 16.0 < 0.60

    @given(st.integers(1, 5), st.integers(1, 5), st.integers(1, 4),
           st.integers(0, 10_000))
    @settings(max_examples=25, deadline=None)
    def test_roundtrip_random_noise_cubes(self, nx, ny, nz, seed):
        rng = np.random.default_rng(seed)
        cube = ImageCube(rng.integers(0, 65536, nx * ny * nz).astype(np.uint16),
                         nx, ny, nz)
        assert decode(encode_lossless(cube)).equals(cube)


class TestInloop:
    def test_delta_zero_matches_lossless_samples(self, smooth_cube):
        cfg = CodecConfig("inloop", quant=QuantizerSpec.absolute(0))
        out = decode(encode_inloop(smooth_cube, cfg))
        assert np.array_equal(out.samples, smooth_cube.samples)

    @pytest.mark.parametrize("delta", [2, 7, 20])
    def test_absolute_bound_exhaustive(self, delta, smooth_cube):
        cfg = CodecConfig("inloop", quant=QuantizerSpec.absolute(delta))
        out = decode(encode_inloop(smooth_cube, cfg))
        err = np.abs(out.samples.astype(np.int64)
                     - smooth_cube.samples.astype(np.int64))
        assert err.max() <= delta

    def test_decode_equals_encoder_trace(self, smooth_cube):
        cfg = CodecConfig("inloop", quant=QuantizerSpec.absolute(2))
        bs, trace = encode_inloop(smooth_cube, cfg, return_trace=True)
        assert decode(bs).equals(trace)

    def test_relative_mode_violations_are_rare(self):
        cube = synthesize_cube(SynthesisParams(
            64, 64, 16, seed=17, spatial_corr_len=20.0, spectral_corr=0.997,
            mean_level=52000, dynamic_range=2500))
        cfg = CodecConfig("inloop", quant=QuantizerSpec.relative(0.01))
        out = decode(encode_inloop(cube, cfg))
        orig = cube.samples.astype(np.float64)
        rec = out.samples.astype(np.float64)
        mask = orig > 0
        violations = np.abs(orig - rec)[mask] > 0.01 * orig[mask]
        assert violations.mean() <= 1e-3

    def test_relative_margin_tightens_the_step(self):
        cube = small_cube()
        tight = CodecConfig("inloop",
                            quant=QuantizerSpec.relative(0.01, margin=0.5))
        loose = CodecConfig("inloop", quant=QuantizerSpec.relative(0.01))
        err_t = np.abs(decode(encode_inloop(cube, tight)).samples.astype(int)
                       - cube.samples.astype(int)).max()
        err_l = np.abs(decode(encode_inloop(cube, loose)).samples.astype(int)
                       - cube.samples.astype(int)).max()
        assert err_t <= err_l


class TestPrequant:
    def test_delta_zero_equivalent_to_lossless(self, smooth_cube):
        cfg = CodecConfig("prequant", quant=QuantizerSpec.absolute(0))
        out = decode(encode_prequant(smooth_cube, cfg))
        assert np.array_equal(out.samples, smooth_cube.samples)

    @pytest.mark.parametrize("delta", [2, 10])
    def test_absolute_bound_exhaustive(self, delta, smooth_cube):
        cfg = CodecConfig("prequant", quant=QuantizerSpec.absolute(delta))
        out = decode(encode_prequant(smooth_cube, cfg))
        err = np.abs(out.samples.astype(np.int64)
                     - smooth_cube.samples.astype(np.int64))
        assert err.max() <= delta

    def test_relative_codebook_bound_exhaustive(self, smooth_cube):
        cfg = CodecConfig("prequant", quant=QuantizerSpec.relative(0.01))
        bs = encode_prequant(smooth_cube, cfg)
        assert bs.quant.codebook is not None
        out = decode(bs)
        orig = smooth_cube.samples.astype(np.float64)
        rec = out.samples.astype(np.float64)
        mask = orig > 0
        assert np.all(np.abs(orig - rec)[mask] <= 0.01 * orig[mask] + 1e-9)

    def test_inloop_beats_prequant_at_matched_delta(self):
        # Same error bound; the in-loop path concentrates its error around
        # the (good) prediction, so SNR is higher and rate no worse.
        cube = synthesize_cube(SynthesisParams(
            64, 64, 16, seed=11, spatial_corr_len=16.0, spectral_corr=0.995,
            mean_level=30000, dynamic_range=8000))
        delta = 10
        bi = encode(cube, CodecConfig("inloop",
                                      quant=QuantizerSpec.absolute(delta)))
        bp = encode(cube, CodecConfig("prequant",
                                      quant=QuantizerSpec.absolute(delta)))
        assert snr(cube, decode(bi)) >= snr(cube, decode(bp))
        assert bi.rate_bpp <= 1.15 * bp.rate_bpp


class TestContainer:
    def test_header_roundtrip_all_fields(self, smooth_cube, tmp_path):
        cfg = CodecConfig("prequant",
                          predictor=PredictorConfig(mode="reduced",
                                                    local_sum="narrow",
                                                    p_bands=2),
                          quant=QuantizerSpec.relative(0.0075))
        bs = encode(smooth_cube, cfg)
        path = tmp_path / "x.hsc"
        bs.write(path)
        again = Bitstream.read(path)
        assert again.pipeline == "prequant"
        assert again.predictor.mode == "reduced"
        assert again.predictor.local_sum == "narrow"
        assert again.predictor.p_bands == 2
        assert again.quant.mode == "rel" and again.quant.r == 0.0075
        assert np.array_equal(again.quant.codebook.reps, bs.quant.codebook.reps)
        assert again.payload == bs.payload
        assert decode(again).equals(decode(bs))

    def test_bad_magic_rejected(self, smooth_cube):
        raw = bytearray(encode_lossless(smooth_cube).to_bytes())
        raw[:4] = b"JUNK"
        with pytest.raises(ValueError, match="magic"):
            Bitstream.from_bytes(bytes(raw))

    def test_truncated_payload_rejected(self, smooth_cube):
        raw = encode_lossless(smooth_cube).to_bytes()
        with pytest.raises(ValueError, match="truncated"):
            Bitstream.from_bytes(raw[:-20])

    def test_truncated_bits_detected_at_decode(self, smooth_cube):
        bs = encode_lossless(smooth_cube)
        lying = Bitstream(**{**bs.__dict__,
                             "payload": bs.payload[:len(bs.payload) // 2]})
        with pytest.raises(ValueError, match="truncated"):
            Bitstream.from_bytes(lying.to_bytes())

    def test_config_validation(self):
        with pytest.raises(ValueError, match="quantizer"):
            CodecConfig("lossless", quant=QuantizerSpec.absolute(2))
        with pytest.raises(ValueError, match="requires"):
            CodecConfig("inloop")
        with pytest.raises(ValueError, match="BIL"):
            CodecConfig("lossless", coding_order="BSQ")


class TestNarrowReducedOrdering:
    def test_high_throughput_mode_not_better(self):
        # Weaker neighborhoods cannot beat the full/wide predictor at the
        # same error bound on a well-correlated cube.
        cube = synthesize_cube(SynthesisParams(
            64, 64, 16, seed=11, spatial_corr_len=16.0, spectral_corr=0.995,
            mean_level=30000, dynamic_range=8000))
        quant = QuantizerSpec.absolute(10)
        full = CodecConfig("inloop", predictor=PredictorConfig(), quant=quant)
        rednar = CodecConfig(
            "inloop",
            predictor=PredictorConfig(mode="reduced", local_sum="narrow"),
            quant=quant)
        snr_full = snr(cube, decode(encode(cube, full)))
        snr_rn = snr(cube, decode(encode(cube, rednar)))
        assert snr_rn <= snr_full + 1e-9


class TestBenchThroughput:
    def test_structure_and_determinism_of_rate(self, smooth_cube):
        cfg = CodecConfig("lossless")
        result = bench_throughput(smooth_cube, cfg, repetitions=3)
        assert result.encode_sps > 0 and result.decode_sps > 0
        assert result.rate_bpp == encode(smooth_cube, cfg).rate_bpp
        assert result.n_samples == smooth_cube.n_samples

    def test_repetitions_validated(self, smooth_cube):
        with pytest.raises(ValueError):
            bench_throughput(smooth_cube, CodecConfig("lossless"),
                             repetitions=2)
