#!/usr/bin/env python3
"""Grid-search the TV regularization weight on held-out synthetic scenes.

Chooses the default lam for TVConfig: the value maximizing average SNR
gain over midpoint decoding across a blocky scene and a smooth scene,
prequantized at a mid-sweep error bound. Run from the repo root:

    python3 scripts/tune_tv_lambda.py
"""

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))
sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from conftest import piecewise_cube  # noqa: E402
from hscodec.codec import CodecConfig, decode, encode  # noqa: E402
from hscodec.cube import SynthesisParams, synthesize_cube  # noqa: E402
from hscodec.metrics import snr  # noqa: E402
from hscodec.quantizer import QuantizerSpec, bin_of  # noqa: E402
from hscodec.recon_tv import TVConfig, tv_reconstruct  # noqa: E402

GRID = (0.05, 0.1, 0.2, 0.5, 1.0)
DELTA = 10


def gain_for(cube, lam):
    bs = encode(cube, CodecConfig("prequant",
                                  quant=QuantizerSpec.absolute(DELTA)))
    dec = decode(bs)
    bins = bin_of(dec.as_bands(), bs.quant, dec.max_value)
    rec = tv_reconstruct(dec, bins, TVConfig(lam=lam, iterations=250))
    return snr(cube, rec) - snr(cube, dec)


def main():
    scenes = {
        "blocky": piecewise_cube(n_x=32, n_y=32, n_z=4, noise_std=8.0,
                                 seed=99),
        "smooth": synthesize_cube(SynthesisParams(
            32, 32, 8, seed=55, spatial_corr_len=8.0, spectral_corr=0.97,
            mean_level=25000, dynamic_range=4000)),
    }
    print(f"TV weight grid search, prequant delta={DELTA}")
    best, best_gain = None, -np.inf
    for lam in GRID:
        gains = {name: gain_for(cube, lam) for name, cube in scenes.items()}
        avg = float(np.mean(list(gains.values())))
        marks = " ".join(f"{n}={g:+.3f}dB" for n, g in gains.items())
        print(f"  lam={lam:<5} {marks}  avg={avg:+.3f}dB")
        if avg > best_gain:
            best, best_gain = lam, avg
    print(f"selected default lam = {best} (avg gain {best_gain:+.3f} dB)")


if __name__ == "__main__":
    main()
