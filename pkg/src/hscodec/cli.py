"""Command-line surface: compress, decompress, reconstruct-tv, evaluate,
sweep, bench and synth subcommands.

Results go to standard output as key=value lines (or a single JSON object
with --json). Exit codes: 0 success, 2 usage error, 3 data error,
4 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from .codec import Bitstream, CodecConfig, bench_throughput, decode, encode
from .cube import (
    SynthesisParams,
    adjacent_band_correlation,
    read_cube_files,
    synthesize_cube,
    write_cube_files,
)
from .metrics import (
    DEFAULT_DELTAS,
    mare,
    max_abs_err,
    max_rel_err,
    rd_sweep,
    snr,
    write_sweep_csv,
)
from .predictor import PredictorConfig
from .quantizer import QuantizerSpec, bin_of
from .recon_tv import TVConfig, tv_reconstruct

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_INTERNAL = 4


class UsageError(Exception):
    pass


def _emit(pairs: dict, as_json: bool) -> None:
    if as_json:
        print(json.dumps(pairs, sort_keys=True))
    else:
        for key, value in pairs.items():
            print(f"{key}={value}")


def _predictor_from_args(args) -> PredictorConfig:
    return PredictorConfig(mode=args.prediction, local_sum=args.localsum,
                           p_bands=args.pbands)


def _quant_from_args(args) -> QuantizerSpec | None:
    if args.pipeline == "lossless":
        bad = [name for name, val in (("--mode", args.mode),
                                      ("--delta", args.delta),
                                      ("--rel", args.rel)) if val is not None]
        if bad:
            raise UsageError(
                f"--pipeline lossless conflicts with {', '.join(bad)}"
            )
        return None
    if args.mode is None:
        raise UsageError(f"--pipeline {args.pipeline} requires --mode abs|rel")
    if args.mode == "abs":
        if args.delta is None:
            raise UsageError("--mode abs requires --delta")
        if args.rel is not None:
            raise UsageError("--mode abs conflicts with --rel")
        return QuantizerSpec.absolute(args.delta)
    if args.rel is None:
        raise UsageError("--mode rel requires --rel")
    if args.delta is not None:
        raise UsageError("--mode rel conflicts with --delta")
    return QuantizerSpec.relative(args.rel, margin=args.margin)


def cmd_compress(args) -> int:
    cube = read_cube_files(args.input)
    cfg = CodecConfig(pipeline=args.pipeline,
                      predictor=_predictor_from_args(args),
                      quant=_quant_from_args(args))
    t0 = time.perf_counter()
    bs = encode(cube, cfg)
    elapsed = time.perf_counter() - t0
    bs.write(args.output)
    out = {
        "output": str(args.output),
        "pipeline": args.pipeline,
        "n_samples": cube.n_samples,
        "rate_bpp": f"{bs.rate_bpp:.6f}",
        "payload_bits": bs.payload_bits,
        "enc_sps": f"{cube.n_samples / elapsed:.0f}",
    }
    if args.pipeline == "inloop" and cfg.quant.mode == "rel":
        dec = decode(bs)
        orig = cube.samples.astype(np.float64)
        rec = dec.samples.astype(np.float64)
        mask = orig > 0
        viol = np.abs(orig - rec)[mask] > cfg.quant.r * orig[mask]
        out["rel_violation_fraction"] = f"{viol.mean() if mask.any() else 0.0:.8f}"
    _emit(out, args.json)
    return EXIT_OK


def cmd_decompress(args) -> int:
    bs = Bitstream.read(args.input)
    cube = decode(bs)
    write_cube_files(cube, args.output)
    _emit({
        "output": str(args.output),
        "pipeline": bs.pipeline,
        "nx": cube.n_x, "ny": cube.n_y, "nz": cube.n_z,
        "bit_depth": cube.bit_depth,
        "order": cube.order,
    }, args.json)
    return EXIT_OK


def cmd_reconstruct_tv(args) -> int:
    bs = Bitstream.read(args.input)
    dec = decode(bs)
    quant = bs.quant if bs.quant is not None else QuantizerSpec.lossless()
    bins = bin_of(dec.as_bands(), quant, dec.max_value)
    cfg = TVConfig(lam=args.lam, iterations=args.iterations, step=args.step)
    rec = tv_reconstruct(dec, bins, cfg)
    write_cube_files(rec, args.output)
    _emit({"output": str(args.output), "lam": args.lam,
           "iterations": args.iterations}, args.json)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    orig = read_cube_files(args.orig)
    rec = read_cube_files(args.recon)
    mare_val, excluded = mare(orig, rec)
    out = {
        "mode": args.mode,
        "snr_db": f"{snr(orig, rec):.4f}",
        "mare": f"{mare_val:.8f}",
        "max_abs_err": max_abs_err(orig, rec),
        "max_rel_err": f"{max_rel_err(orig, rec):.8f}",
        "mare_excluded": excluded,
    }
    _emit(out, args.json)
    if args.csv:
        row = "snr_db,mare,max_abs_err,max_rel_err\n" + ",".join([
            out["snr_db"], out["mare"], str(out["max_abs_err"]),
            out["max_rel_err"]]) + "\n"
        Path(args.csv).write_text(row)
    return EXIT_OK


def _parse_sweep_config(path: str | None) -> dict:
    cfg = {
        "pipelines": ["inloop", "prequant"],
        "deltas": list(DEFAULT_DELTAS),
        "rels": [],
        "recon": "none",
        "timing": False,
    }
    if path is None:
        return cfg
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"malformed sweep config line: {line!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key == "pipelines":
            cfg["pipelines"] = [p.strip() for p in val.split(",") if p.strip()]
        elif key == "deltas":
            cfg["deltas"] = [int(v) for v in val.split(",") if v.strip()]
        elif key == "rels":
            cfg["rels"] = [float(v) for v in val.split(",") if v.strip()]
        elif key == "recon":
            cfg["recon"] = val
        elif key == "timing":
            cfg["timing"] = val.lower() in ("1", "true", "yes")
        else:
            raise ValueError(f"unknown sweep config key {key!r}")
    return cfg


def cmd_sweep(args) -> int:
    cube = read_cube_files(args.input)
    cfg = _parse_sweep_config(args.config)
    if not cfg["deltas"] and not cfg["rels"]:
        raise ValueError("sweep config selects no quality points")
    records, errors = rd_sweep(
        cube, pipelines=tuple(cfg["pipelines"]), deltas=tuple(cfg["deltas"]),
        rels=tuple(cfg["rels"]), recon=cfg["recon"],
        include_timing=cfg["timing"],
    )
    write_sweep_csv(args.out, records, errors)
    _emit({"out": str(args.out), "points": len(records),
           "failures": len(errors)}, args.json)
    return EXIT_OK if not errors else EXIT_DATA


def cmd_bench(args) -> int:
    cube = read_cube_files(args.input)
    cfg = CodecConfig(pipeline=args.pipeline,
                      predictor=_predictor_from_args(args),
                      quant=_quant_from_args(args))
    result = bench_throughput(cube, cfg, repetitions=args.reps)
    _emit({
        "pipeline": args.pipeline,
        "enc_sps": f"{result.encode_sps:.0f}",
        "dec_sps": f"{result.decode_sps:.0f}",
        "rate_bpp": f"{result.rate_bpp:.6f}",
        "n_samples": result.n_samples,
        "repetitions": result.repetitions,
    }, args.json)
    return EXIT_OK


def cmd_synth(args) -> int:
    params = SynthesisParams(
        n_x=args.nx, n_y=args.ny, n_z=args.nz,
        spatial_corr_len=args.spatial_corr,
        spectral_corr=args.spectral_corr,
        mean_level=args.mean, dynamic_range=args.dynamic_range,
        bit_depth=args.bitdepth, seed=args.seed,
    )
    cube = synthesize_cube(params)
    write_cube_files(cube, args.out, sensor="synthetic")
    _emit({
        "out": str(args.out),
        "nx": cube.n_x, "ny": cube.n_y, "nz": cube.n_z,
        "bit_depth": cube.bit_depth,
        "adjacent_corr": f"{adjacent_band_correlation(cube):.4f}",
    }, args.json)
    return EXIT_OK


def _add_predictor_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--prediction", choices=("full", "reduced"), default="full")
    p.add_argument("--localsum", choices=("wide", "narrow"), default="wide")
    p.add_argument("--pbands", type=int, default=3)


def _add_quant_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--pipeline", choices=("inloop", "prequant", "lossless"),
                   required=True)
    p.add_argument("--mode", choices=("abs", "rel"), default=None)
    p.add_argument("--delta", type=int, default=None)
    p.add_argument("--rel", type=float, default=None)
    p.add_argument("--margin", type=float, default=1.0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hscodec",
        description="Predictive near-lossless compression of hyperspectral cubes",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compress", help="encode a .raw/.hdr cube to .hsc")
    p.add_argument("--input", required=True, help="path to the .raw payload")
    p.add_argument("--output", required=True, help="path for the .hsc bitstream")
    _add_quant_flags(p)
    _add_predictor_flags(p)
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("decompress", help="decode an .hsc bitstream to .raw/.hdr")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_decompress)

    p = sub.add_parser("reconstruct-tv",
                       help="decode and TV-reconstruct into the quantization bins")
    p.add_argument("--input", required=True, help=".hsc bitstream")
    p.add_argument("--output", required=True, help="reconstructed .raw path")
    p.add_argument("--lam", type=float, default=TVConfig().lam)
    p.add_argument("--iterations", type=int, default=TVConfig().iterations)
    p.add_argument("--step", type=float, default=TVConfig().step)
    p.set_defaults(func=cmd_reconstruct_tv)

    p = sub.add_parser("evaluate", help="quality metrics between two cubes")
    p.add_argument("--orig", required=True)
    p.add_argument("--recon", required=True)
    p.add_argument("--mode", choices=("abs", "rel"), default="abs")
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", help="rate-distortion sweep to CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--config", default=None, help="key=value sweep config file")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bench", help="encode/decode throughput benchmark")
    p.add_argument("--input", required=True)
    p.add_argument("--reps", type=int, default=5)
    _add_quant_flags(p)
    _add_predictor_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("synth", help="generate a synthetic test cube")
    p.add_argument("--nx", type=int, required=True)
    p.add_argument("--ny", type=int, required=True)
    p.add_argument("--nz", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--spectral-corr", type=float, default=0.95)
    p.add_argument("--spatial-corr", type=float, default=4.0)
    p.add_argument("--mean", type=int, default=20000)
    p.add_argument("--dynamic-range", type=int, default=16000)
    p.add_argument("--bitdepth", type=int, default=16)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    for sp in sub.choices.values():
        sp.add_argument("--json", action="store_true",
                        help="emit one JSON object instead of key=value lines")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
