"""Predictive compression toolkit for hyperspectral image cubes.

Pipelines: lossless predictive coding, near-lossless in-loop quantization,
and prequantization followed by lossless coding; plus TV-regularized
reconstruction and a rate-distortion benchmark harness.
"""

from .codec import (
    Bitstream,
    CodecConfig,
    bench_throughput,
    decode,
    encode,
    encode_inloop,
    encode_lossless,
    encode_prequant,
)
from .cube import (
    CubeHeader,
    ImageCube,
    SynthesisParams,
    band_slice,
    load_cube,
    read_cube_files,
    reorder,
    store_cube,
    synthesize_cube,
    write_cube_files,
)
from .metrics import (
    RDRecord,
    error_histogram,
    interpolate_at_rate,
    mare,
    rd_sweep,
    snr,
)
from .predictor import PredictorConfig, PredictorState
from .quantizer import (
    BinSpec,
    QuantizerSpec,
    RelativeCodebook,
    bin_of,
    build_relative_codebook,
    codebook_quantize,
    inloop_quantize_residual,
    relative_step,
    uniform_quantize,
)
from .recon_tv import TVConfig, clip_correction, tv_reconstruct

__version__ = "0.1.0"
