#!/usr/bin/env python3
"""Produce an (original, decoded) cube pair for reconstruction training.

Wraps the compressor CLI: synthesize (or take an existing .raw), compress
at the requested quality point, decompress.

    python3 scripts/prepare_pair.py --out-dir pairs --seed 1 --delta 10
"""

import argparse
import subprocess
import sys
from pathlib import Path


def hscodec(*args: str) -> None:
    subprocess.run([sys.executable, "-m", "hscodec", *args], check=True)


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--out-dir", required=True)
    ap.add_argument("--input", default=None,
                    help="existing .raw scene; synthesized when omitted")
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--nx", type=int, default=96)
    ap.add_argument("--ny", type=int, default=96)
    ap.add_argument("--nz", type=int, default=16)
    ap.add_argument("--pipeline", default="prequant",
                    choices=("prequant", "inloop"))
    ap.add_argument("--mode", default="abs", choices=("abs", "rel"))
    ap.add_argument("--delta", type=int, default=10)
    ap.add_argument("--rel", type=float, default=None)
    args = ap.parse_args()

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    scene = Path(args.input) if args.input else out / f"scene{args.seed}.raw"
    if not args.input:
        hscodec("synth", "--nx", str(args.nx), "--ny", str(args.ny),
                "--nz", str(args.nz), "--seed", str(args.seed),
                "--out", str(scene))
    hsc = out / (scene.stem + ".hsc")
    dec = out / (scene.stem + "_dec.raw")
    quality = (["--delta", str(args.delta)] if args.mode == "abs"
               else ["--rel", str(args.rel)])
    hscodec("compress", "--input", str(scene), "--output", str(hsc),
            "--pipeline", args.pipeline, "--mode", args.mode, *quality)
    hscodec("decompress", "--input", str(hsc), "--output", str(dec))
    print(f"orig={scene}")
    print(f"decoded={dec}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
