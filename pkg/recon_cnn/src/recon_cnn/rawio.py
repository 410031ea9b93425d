"""Raw cube interchange: headerless uint16 little-endian .raw + .hdr sidecar.

This mirrors the compressor package's on-disk format (the interface
between the two components); nothing is imported from it.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

ORDERS = ("BSQ", "BIL")


def header_path_for(raw_path: str | Path) -> Path:
    return Path(raw_path).with_suffix(".hdr")


def read_header(raw_path: str | Path) -> dict:
    fields: dict[str, str] = {}
    for line in header_path_for(raw_path).read_text().splitlines():
        line = line.strip()
        if line and "=" in line:
            key, _, val = line.partition("=")
            fields[key.strip().upper()] = val.strip()
    hdr = {
        "nx": int(fields["NX"]),
        "ny": int(fields["NY"]),
        "nz": int(fields["NZ"]),
        "bit_depth": int(fields.get("BITDEPTH", "16")),
        "order": fields.get("ORDER", "BSQ").upper(),
        "sensor": fields.get("SENSOR", ""),
    }
    if hdr["order"] not in ORDERS:
        raise ValueError(f"unsupported order {hdr['order']!r}")
    return hdr


def read_cube(raw_path: str | Path) -> tuple[np.ndarray, dict]:
    """Load a cube as a (nz, ny, nx) uint16 array plus its header dict."""
    hdr = read_header(raw_path)
    nx, ny, nz = hdr["nx"], hdr["ny"], hdr["nz"]
    flat = np.fromfile(raw_path, dtype="<u2")
    if flat.size != nx * ny * nz:
        raise ValueError(
            f"{raw_path}: {flat.size} samples, header expects {nx * ny * nz}")
    if hdr["order"] == "BSQ":
        bands = flat.reshape(nz, ny, nx)
    else:
        bands = flat.reshape(ny, nz, nx).swapaxes(0, 1)
    return np.ascontiguousarray(bands), hdr


def write_cube(bands: np.ndarray, raw_path: str | Path, bit_depth: int = 16,
               order: str = "BSQ", sensor: str = "") -> None:
    """Write a (nz, ny, nx) array as .raw + .hdr in the given order."""
    bands = np.asarray(bands, dtype="<u2")
    nz, ny, nx = bands.shape
    if order == "BSQ":
        payload = bands
    elif order == "BIL":
        payload = bands.swapaxes(0, 1)
    else:
        raise ValueError(f"unsupported order {order!r}")
    Path(raw_path).write_bytes(np.ascontiguousarray(payload).tobytes())
    header_path_for(raw_path).write_text(
        f"NX={nx}\nNY={ny}\nNZ={nz}\nBITDEPTH={bit_depth}\n"
        f"ORDER={order}\nSENSOR={sensor}\n")
