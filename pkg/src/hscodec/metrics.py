"""Quality metrics and the rate-distortion sweep harness.

The sweep walks quality points per pipeline, producing one record per
(pipeline, quality, reconstruction) with a stable ordering and a fixed CSV
schema. Throughput columns are zero unless timing is explicitly requested,
so sweep output stays byte-identical across reruns.
"""

from __future__ import annotations

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace as dc_replace
from pathlib import Path

import numpy as np

from .codec import CodecConfig, decode, encode
from .cube import ImageCube
from .predictor import PredictorConfig
from .quantizer import QuantizerSpec, bin_of
from .recon_tv import TVConfig, tv_reconstruct

SNR_SENTINEL_DB = 999.0
DEFAULT_DELTAS = (1, 3, 5, 7, 10, 15, 20, 30, 50)
DEFAULT_RELS = (0.01, 0.0075, 0.005, 0.0025, 0.001, 0.0005)

CSV_COLUMNS = ("pipeline", "delta_or_r", "rate_bpp", "snr_db", "mare",
               "max_abs_err", "max_rel_err", "enc_sps", "dec_sps", "recon")


def _flat(x) -> np.ndarray:
    if isinstance(x, ImageCube):
        return x.samples.astype(np.float64)
    return np.asarray(x, dtype=np.float64).reshape(-1)


def _check_dims(orig, rec) -> tuple[np.ndarray, np.ndarray]:
    a, b = _flat(orig), _flat(rec)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    if isinstance(orig, ImageCube) and isinstance(rec, ImageCube):
        if orig.dims != rec.dims:
            raise ValueError(f"dimension mismatch: {orig.dims} vs {rec.dims}")
    return a, b


def snr(orig, rec) -> float:
    """Signal-to-noise ratio in dB; identical inputs give the 999 sentinel."""
    a, b = _check_dims(orig, rec)
    err = float(((a - b) ** 2).sum())
    sig = float((a ** 2).sum())
    if err == 0.0:
        return SNR_SENTINEL_DB
    if sig == 0.0:
        warnings.warn("all-zero reference signal; SNR reported as 0 dB")
        return 0.0
    return float(10.0 * np.log10(sig / err))


def mare(orig, rec) -> tuple[float, int]:
    """Mean absolute relative error over samples with positive reference.

    Returns (value, number of zero-reference samples excluded).
    """
    a, b = _check_dims(orig, rec)
    mask = a > 0
    excluded = int(a.size - mask.sum())
    if not mask.any():
        return 0.0, excluded
    return float((np.abs(a - b)[mask] / a[mask]).mean()), excluded


def max_abs_err(orig, rec) -> int:
    a, b = _check_dims(orig, rec)
    return int(np.abs(a - b).max()) if a.size else 0


def max_rel_err(orig, rec) -> float:
    a, b = _check_dims(orig, rec)
    mask = a > 0
    if not mask.any():
        return 0.0
    return float((np.abs(a - b)[mask] / a[mask]).max())


@dataclass(frozen=True)
class Histogram:
    counts: np.ndarray
    edges: np.ndarray
    n_excluded: int

    @property
    def total(self) -> int:
        return int(self.counts.sum()) + self.n_excluded


def error_histogram(orig, rec, mode: str = "absolute", bins=81) -> Histogram:
    """Histogram of signed errors (rec - orig), absolute or relative.

    Relative mode excludes zero-reference samples (reported in n_excluded);
    counts plus exclusions always total the sample count.
    """
    a, b = _check_dims(orig, rec)
    if mode == "absolute":
        errors = b - a
        excluded = 0
    elif mode == "relative":
        mask = a > 0
        errors = (b[mask] - a[mask]) / a[mask]
        excluded = int(a.size - mask.sum())
    else:
        raise ValueError("mode must be 'absolute' or 'relative'")
    counts, edges = np.histogram(errors, bins=bins)
    return Histogram(counts, edges, excluded)


@dataclass(frozen=True)
class RDRecord:
    """One sweep point of the rate-distortion/throughput table."""

    pipeline: str
    delta_or_r: float
    rate_bpp: float
    snr_db: float
    mare: float
    max_abs_err: int
    max_rel_err: float
    enc_sps: float = 0.0
    dec_sps: float = 0.0
    recon: str = "none"

    def csv_row(self) -> str:
        return ",".join([
            self.pipeline,
            f"{self.delta_or_r:g}",
            f"{self.rate_bpp:.6f}",
            f"{self.snr_db:.4f}",
            f"{self.mare:.8f}",
            f"{self.max_abs_err:d}",
            f"{self.max_rel_err:.8f}",
            f"{self.enc_sps:.0f}",
            f"{self.dec_sps:.0f}",
            self.recon,
        ])


def records_to_csv(records: list[RDRecord], errors: list[str] | None = None) -> str:
    lines = [",".join(CSV_COLUMNS)]
    lines.extend(r.csv_row() for r in records)
    for err in errors or []:
        lines.append(f"# error: {err}")
    return "\n".join(lines) + "\n"


def _sweep_workers() -> int:
    try:
        return max(1, int(os.environ.get("HSC_THREADS", "1")))
    except ValueError:
        return 1


def _quality_tag(mode: str, value: float) -> str:
    return f"{mode}:{value:g}"


def _one_point(cube: ImageCube, pipeline: str, mode: str, value: float,
               pred: PredictorConfig, recon, tv_cfg: TVConfig,
               include_timing: bool, bench_reps: int) -> list[RDRecord]:
    if mode == "abs":
        quant = QuantizerSpec.absolute(int(value))
    else:
        quant = QuantizerSpec.relative(float(value))
    cfg = CodecConfig(pipeline=pipeline, predictor=pred, quant=quant)
    bs = encode(cube, cfg)
    dec = decode(bs)
    enc_sps = dec_sps = 0.0
    if include_timing:
        from .codec import bench_throughput
        t = bench_throughput(cube, cfg, repetitions=max(3, bench_reps))
        enc_sps, dec_sps = t.encode_sps, t.decode_sps
    mare_val, _ = mare(cube, dec)
    base = RDRecord(
        pipeline=pipeline, delta_or_r=value, rate_bpp=bs.rate_bpp,
        snr_db=snr(cube, dec), mare=mare_val,
        max_abs_err=max_abs_err(cube, dec), max_rel_err=max_rel_err(cube, dec),
        enc_sps=enc_sps, dec_sps=dec_sps, recon="none",
    )
    out = [base]
    if recon == "tv" or callable(recon):
        quant_eff = bs.quant if bs.quant is not None else QuantizerSpec.lossless()
        if callable(recon):
            rec_cube = recon(dec, bs)
            tag = "external"
        else:
            bins = bin_of(dec.as_bands(), quant_eff, dec.max_value)
            rec_cube = tv_reconstruct(dec, bins, tv_cfg)
            tag = "tv"
        mare_val, _ = mare(cube, rec_cube)
        out.append(dc_replace(
            base, snr_db=snr(cube, rec_cube), mare=mare_val,
            max_abs_err=max_abs_err(cube, rec_cube),
            max_rel_err=max_rel_err(cube, rec_cube), recon=tag,
        ))
    return out


def rd_sweep(cube: ImageCube, pipelines=("inloop", "prequant"),
             deltas=DEFAULT_DELTAS, rels=(), recon="none",
             pred: PredictorConfig | None = None,
             tv_cfg: TVConfig | None = None,
             include_timing: bool = False,
             bench_reps: int = 3) -> tuple[list[RDRecord], list[str]]:
    """Run every (pipeline, quality point), collecting records and failures.

    Points run independently (HSC_THREADS caps the pool); output ordering
    is stable by (pipeline, mode, value, recon) regardless of completion
    order. Failures are reported as strings and do not stop the sweep.
    """
    if not deltas and not rels:
        raise ValueError("sweep needs at least one quality point")
    pred = pred or PredictorConfig()
    tv_cfg = tv_cfg or TVConfig()
    jobs = []
    for pipeline in pipelines:
        for d in deltas:
            jobs.append((pipeline, "abs", float(d)))
        for r in rels:
            jobs.append((pipeline, "rel", float(r)))

    def run(job):
        pipeline, mode, value = job
        return _one_point(cube, pipeline, mode, value, pred, recon, tv_cfg,
                          include_timing, bench_reps)

    results: dict[tuple, list[RDRecord]] = {}
    errors: dict[tuple, str] = {}
    workers = _sweep_workers()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {pool.submit(run, j): j for j in jobs}
            for fut, job in futures.items():
                try:
                    results[job] = fut.result()
                except Exception as exc:  # record and continue
                    errors[job] = str(exc)
    else:
        for job in jobs:
            try:
                results[job] = run(job)
            except Exception as exc:
                errors[job] = str(exc)

    records: list[RDRecord] = []
    error_lines: list[str] = []
    for job in sorted(jobs, key=lambda j: (j[0], j[1], j[2])):
        if job in results:
            records.extend(results[job])
        elif job in errors:
            error_lines.append(f"{job[0]} {_quality_tag(job[1], job[2])}: {errors[job]}")
    return records, error_lines


def write_sweep_csv(path: str | Path, records: list[RDRecord],
                    errors: list[str] | None = None) -> None:
    Path(path).write_text(records_to_csv(records, errors))


def interpolate_at_rate(records: list[RDRecord], target_bpp: float) -> dict:
    """Linear interpolation of SNR and MARE at a target rate.

    Requires records bracketing the target; refuses to extrapolate.
    An exact-rate record is returned verbatim.
    """
    if len(records) < 1:
        raise ValueError("no records to interpolate")
    pts = sorted(records, key=lambda r: r.rate_bpp)
    for r in pts:
        if r.rate_bpp == target_bpp:
            return {"rate_bpp": target_bpp, "snr_db": r.snr_db, "mare": r.mare}
    lo = [r for r in pts if r.rate_bpp < target_bpp]
    hi = [r for r in pts if r.rate_bpp > target_bpp]
    if not lo or not hi:
        raise ValueError(
            f"target rate {target_bpp} outside the available range "
            f"[{pts[0].rate_bpp:.4f}, {pts[-1].rate_bpp:.4f}]"
        )
    a, b = lo[-1], hi[0]
    w = (target_bpp - a.rate_bpp) / (b.rate_bpp - a.rate_bpp)
    return {
        "rate_bpp": target_bpp,
        "snr_db": a.snr_db + w * (b.snr_db - a.snr_db),
        "mare": a.mare + w * (b.mare - a.mare),
    }
