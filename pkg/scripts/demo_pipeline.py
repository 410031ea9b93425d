#!/usr/bin/env python3
"""End-to-end walkthrough: synthesize, compress three ways, sweep, report.

    python3 scripts/demo_pipeline.py [workdir]
"""

import subprocess
import sys
import tempfile
from pathlib import Path


def run(*args):
    cmd = [sys.executable, "-m", "hscodec", *args]
    print("$", " ".join(cmd[2:]))
    out = subprocess.run(cmd, capture_output=True, text=True, check=True)
    print(out.stdout, end="")
    return out.stdout


def main():
    workdir = Path(sys.argv[1]) if len(sys.argv) > 1 else \
        Path(tempfile.mkdtemp(prefix="hscodec-demo-"))
    workdir.mkdir(parents=True, exist_ok=True)
    scene = workdir / "scene.raw"

    run("synth", "--nx", "64", "--ny", "64", "--nz", "16", "--seed", "7",
        "--spectral-corr", "0.95", "--out", str(scene))

    for tag, flags in {
        "lossless": ["--pipeline", "lossless"],
        "inloop_d5": ["--pipeline", "inloop", "--mode", "abs", "--delta", "5"],
        "prequant_d5": ["--pipeline", "prequant", "--mode", "abs",
                        "--delta", "5"],
        "inloop_r01": ["--pipeline", "inloop", "--mode", "rel",
                       "--rel", "0.01"],
    }.items():
        hsc = workdir / f"{tag}.hsc"
        dec = workdir / f"{tag}_dec.raw"
        run("compress", "--input", str(scene), "--output", str(hsc), *flags)
        run("decompress", "--input", str(hsc), "--output", str(dec))
        run("evaluate", "--orig", str(scene), "--recon", str(dec))

    tv = workdir / "tv.raw"
    run("reconstruct-tv", "--input", str(workdir / "prequant_d5.hsc"),
        "--output", str(tv))
    run("evaluate", "--orig", str(scene), "--recon", str(tv))

    run("sweep", "--input", str(scene), "--out", str(workdir / "sweep.csv"))
    run("bench", "--input", str(scene), "--pipeline", "prequant",
        "--mode", "abs", "--delta", "5", "--reps", "5")
    print(f"artifacts in {workdir}")


if __name__ == "__main__":
    main()
