"""Command-line entry points: recon-train and recon-apply.

Ingests the compressor package's .raw/.hdr files; compressed inputs are
prepared with the `hscodec` CLI. Output is key=value lines (exit 0 on
success, 2 usage, 3 data error).
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .data import TrainSpec, extract_patches_multi
from .infer import reconstruct
from .model import load_model, save_model
from .rawio import read_cube, write_cube
from .train import train


def _snr(orig: np.ndarray, rec: np.ndarray) -> float:
    err = float(((orig.astype(np.float64) - rec.astype(np.float64)) ** 2).sum())
    sig = float((orig.astype(np.float64) ** 2).sum())
    if err == 0:
        return 999.0
    return 10.0 * np.log10(sig / err)


def build_train_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="recon-train",
        description="Train a reconstruction model on (orig, decoded) cube pairs")
    p.add_argument("--orig", action="append", required=True,
                   help="original .raw (repeatable, paired with --decoded)")
    p.add_argument("--decoded", action="append", required=True,
                   help="decoded .raw from the compressor (repeatable)")
    p.add_argument("--mode", choices=("abs", "rel"), required=True)
    p.add_argument("--bound", type=float, required=True,
                   help="delta in digital numbers (abs) or r (rel)")
    p.add_argument("--pipeline", default="prequant",
                   choices=("inloop", "prequant"))
    p.add_argument("--sensor", default="")
    p.add_argument("--patches", type=int, default=5000)
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--lr", type=float, default=1e-4)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--large-corpus", action="store_true",
                   help="full-corpus recipe: lr 1e-8, 1000 epochs")
    p.add_argument("--out", required=True, help="model artifact path (.pt)")
    p.add_argument("--quiet", action="store_true")
    return p


def main_train(argv=None) -> int:
    args = build_train_parser().parse_args(argv)
    if len(args.orig) != len(args.decoded):
        print("usage error: --orig and --decoded counts differ",
              file=sys.stderr)
        return 2
    lr, epochs = args.lr, args.epochs
    if args.large_corpus:
        lr, epochs = 1e-8, 1000
    try:
        pairs = []
        for orig_path, dec_path in zip(args.orig, args.decoded):
            orig, _ = read_cube(orig_path)
            dec, _ = read_cube(dec_path)
            pairs.append((orig, dec))
        spec = TrainSpec(mode=args.mode, bound=args.bound,
                         pipeline=args.pipeline, n_patches=args.patches,
                         epochs=epochs, lr=lr, batch_size=args.batch_size,
                         seed=args.seed)
        dec_p, orig_p = extract_patches_multi(pairs, spec.n_patches, spec.seed)
        log = None if args.quiet else lambda msg: print(msg, flush=True)
        model, stats = train(dec_p, orig_p, spec, log=log)
        save_model(model, args.out, pipeline=args.pipeline,
                   sensor=args.sensor,
                   extra={"n_patches": spec.n_patches, "epochs": epochs,
                          "lr": lr, "seed": spec.seed})
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    print(f"model={args.out}")
    print(f"val_mse_identity={stats['val_mse_identity']:.6e}")
    print(f"val_mse_final={stats['val_mse_final']:.6e}")
    print(f"val_gain_db={stats['val_gain_db']:.4f}")
    return 0


def build_apply_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="recon-apply",
        description="Reconstruct a decoded cube with a trained model")
    p.add_argument("--input", required=True, help="decoded .raw")
    p.add_argument("--model", required=True, help="artifact from recon-train")
    p.add_argument("--output", required=True, help="reconstructed .raw")
    p.add_argument("--ref", default=None,
                   help="optional original .raw: prints SNR before/after")
    return p


def main_apply(argv=None) -> int:
    args = build_apply_parser().parse_args(argv)
    try:
        decoded, hdr = read_cube(args.input)
        model, meta = load_model(args.model)
        max_value = (1 << hdr["bit_depth"]) - 1
        rec = reconstruct(decoded, model, max_value=max_value)
        write_cube(rec, args.output, bit_depth=hdr["bit_depth"],
                   order=hdr["order"], sensor=hdr["sensor"])
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    print(f"output={args.output}")
    print(f"model_key={meta['pipeline']}:{meta['mode']}:{meta['bound']}"
          f":{meta['sensor']}")
    if args.ref:
        orig, _ = read_cube(args.ref)
        print(f"snr_decoded_db={_snr(orig, decoded):.4f}")
        print(f"snr_reconstructed_db={_snr(orig, rec):.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main_train())
