#!/usr/bin/env python3
"""Regenerate the shared correction-clipping test vectors.

Both reconstruction components (the TV baseline here and the CNN package)
must clip identically; this file is the contract. Columns:
E,decoded,delta_or_r,mode,expected — with expected computed by the primary
clip_correction over bins for a 16-bit sample range.

    python3 scripts/make_clip_vectors.py > data/clip_vectors.csv
"""

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from hscodec.quantizer import QuantizerSpec, bin_of  # noqa: E402
from hscodec.recon_tv import clip_correction  # noqa: E402


def rows():
    # the documented absolute cases at delta=2 and relative case at R=0.01
    cases = [
        (3.0, 100, 2, "abs"),
        (-5.0, 100, 2, "abs"),
        (1.0, 100, 2, "abs"),
        (15.0, 1000, 0.01, "rel"),
        (-15.0, 1000, 0.01, "rel"),
        (9.5, 1000, 0.01, "rel"),
    ]
    # systematic coverage incl. range edges and fractional corrections
    rng = np.random.default_rng(2024)
    for delta in (0, 1, 2, 7, 10, 50):
        for decoded in (0, 1, 5, 100, 32768, 65530, 65535):
            for e in (-2.5 * delta - 1, -float(delta), -0.25, 0.0, 0.75,
                      float(delta), 1.5 * delta + 0.5):
                cases.append((float(e), decoded, delta, "abs"))
    for r in (0.01, 0.005, 0.0005):
        for decoded in (0, 1, 100, 1000, 52000, 65535):
            for e in (-2000.0, -r * decoded, -0.3, 0.0, 0.4, r * decoded,
                      2000.0):
                cases.append((float(e), decoded, r, "rel"))
    for _ in range(200):
        mode = rng.choice(["abs", "rel"])
        decoded = int(rng.integers(0, 65536))
        if mode == "abs":
            param = int(rng.integers(0, 60))
            e = float(rng.normal(0, max(param, 1)))
        else:
            param = float(rng.choice([0.01, 0.0075, 0.005, 0.0025, 0.001]))
            e = float(rng.normal(0, max(param * decoded, 1.0)))
        cases.append((e, decoded, param, mode))
    return cases


def main():
    print("E,decoded,delta_or_r,mode,expected")
    for e, decoded, param, mode in rows():
        if mode == "abs":
            spec = QuantizerSpec.absolute(int(param))
        else:
            spec = QuantizerSpec.relative(float(param))
        bins = bin_of(np.array([float(decoded)]), spec, 65535)
        clipped = clip_correction(np.array([e]), np.array([float(decoded)]),
                                  bins)
        print(f"{e!r},{decoded},{param!r},{mode},{float(clipped[0])!r}")


if __name__ == "__main__":
    main()
