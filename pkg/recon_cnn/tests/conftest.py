import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from recon_cnn.rawio import read_cube, write_cube

REPO_ROOT = Path(__file__).resolve().parents[2]
CLIP_VECTORS = REPO_ROOT / "data" / "clip_vectors.csv"


def hscodec(*args: str) -> str:
    """Invoke the compressor CLI (the only interface to the primary)."""
    result = subprocess.run([sys.executable, "-m", "hscodec", *args],
                            capture_output=True, text=True)
    if result.returncode != 0:
        raise RuntimeError(
            f"hscodec {' '.join(args)} failed ({result.returncode}): "
            f"{result.stderr}")
    return result.stdout


def blocky_scene(n_x: int, n_y: int, n_z: int, seed: int, block: int = 8,
                 noise_std: float = 6.0) -> np.ndarray:
    """Plateaued test scene with sensor noise; spectrally correlated."""
    rng = np.random.default_rng(seed)
    levels = rng.integers(5000, 60000,
                          size=(n_z, n_y // block, n_x // block)).astype(float)
    for z in range(1, n_z):
        levels[z] = levels[0] + rng.integers(-3000, 3000, levels.shape[1:])
    bands = np.repeat(np.repeat(levels, block, axis=1), block, axis=2)
    bands = bands + rng.normal(0.0, noise_std, bands.shape)
    return np.clip(np.rint(bands), 0, 65535).astype(np.uint16)


def compressed_pair(tmpdir: Path, scene: np.ndarray, tag: str, delta: int
                    ) -> tuple[np.ndarray, np.ndarray]:
    """Write a scene, push it through prequant compression, load both ends."""
    raw = tmpdir / f"{tag}.raw"
    hsc = tmpdir / f"{tag}.hsc"
    dec_raw = tmpdir / f"{tag}_dec.raw"
    write_cube(scene, raw, sensor="synthetic")
    hscodec("compress", "--input", str(raw), "--output", str(hsc),
            "--pipeline", "prequant", "--mode", "abs", "--delta", str(delta))
    hscodec("decompress", "--input", str(hsc), "--output", str(dec_raw))
    decoded, _ = read_cube(dec_raw)
    return scene, decoded


@pytest.fixture(scope="session")
def delta10_pair(tmp_path_factory):
    """One (orig, decoded) cube pair at the delta=10 quality point."""
    tmpdir = tmp_path_factory.mktemp("pair")
    scene = blocky_scene(96, 96, 16, seed=1)
    return compressed_pair(tmpdir, scene, "train", 10)
