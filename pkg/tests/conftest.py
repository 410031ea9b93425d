import numpy as np
import pytest

from hscodec.codec import CodecConfig, decode, encode
from hscodec.cube import ImageCube, SynthesisParams, synthesize_cube
from hscodec.quantizer import QuantizerSpec


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile the numba kernels once so timed tests measure steady state."""
    cube = synthesize_cube(SynthesisParams(8, 8, 3, seed=0))
    for cfg in (
        CodecConfig("lossless"),
        CodecConfig("inloop", quant=QuantizerSpec.absolute(2)),
        CodecConfig("inloop", quant=QuantizerSpec.relative(0.01)),
        CodecConfig("prequant", quant=QuantizerSpec.absolute(2)),
    ):
        decode(encode(cube, cfg))


def piecewise_cube(n_x=16, n_y=16, n_z=2, block=4, noise_std=6.0,
                   seed=0, lo=5000, hi=60000) -> ImageCube:
    """Piecewise-constant plateaus plus mild sensor noise, spectrally paired."""
    rng = np.random.default_rng(seed)
    by, bx = n_y // block, n_x // block
    levels = rng.integers(lo, hi, size=(n_z, by, bx)).astype(np.float64)
    for z in range(1, n_z):
        levels[z] = levels[0] + rng.integers(-2000, 2000, size=(by, bx))
    bands = np.repeat(np.repeat(levels, block, axis=1), block, axis=2)
    bands = bands + rng.normal(0.0, noise_std, bands.shape)
    bands = np.clip(np.rint(bands), 0, 65535).astype(np.uint16)
    return ImageCube.from_bands(bands, 16, "BSQ")


@pytest.fixture
def smooth_cube():
    """Slightly rough but well-correlated cube for codec behavior tests."""
    return synthesize_cube(SynthesisParams(
        32, 32, 8, seed=4, spatial_corr_len=4.0, spectral_corr=0.95,
        mean_level=20000, dynamic_range=16000))
