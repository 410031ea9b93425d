"""Secondary acceptance: bin consistency, desk-scale gain, clip contract.

The desk-scale gain criterion trains the pinned configuration (5000
patches, 30 epochs, delta=10, lr 1e-4) on CPU; expect roughly half an
hour. Run with `pytest tests/test_acceptance.py -v -s`.
"""

import time
from contextlib import contextmanager

import numpy as np
import pytest

from conftest import CLIP_VECTORS, blocky_scene, compressed_pair
from recon_cnn.clip import clip_layer
from recon_cnn.data import TrainSpec, extract_patches_multi
from recon_cnn.infer import reconstruct
from recon_cnn.train import train

DELTA = 10


@contextmanager
def criterion(name: str):
    start = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"[ACCEPTANCE] {name}: FAIL ({time.perf_counter() - start:.1f}s)")
        raise
    print(f"[ACCEPTANCE] {name}: PASS ({time.perf_counter() - start:.1f}s)")


def _snr(orig: np.ndarray, rec: np.ndarray) -> float:
    err = ((orig.astype(np.float64) - rec.astype(np.float64)) ** 2).sum()
    sig = (orig.astype(np.float64) ** 2).sum()
    return float(10 * np.log10(sig / err))


@pytest.fixture(scope="module")
def trained_setup(tmp_path_factory):
    """Pinned desk-scale training on two scenes; a third held out."""
    tmpdir = tmp_path_factory.mktemp("accept")
    pairs = [compressed_pair(tmpdir, blocky_scene(96, 96, 16, seed=s),
                             f"train{s}", DELTA) for s in (1, 2)]
    held_orig, held_dec = compressed_pair(
        tmpdir, blocky_scene(96, 96, 16, seed=3), "heldout", DELTA)
    spec = TrainSpec(mode="abs", bound=DELTA, n_patches=5000, epochs=30,
                     lr=1e-4, seed=0)
    dec_p, orig_p = extract_patches_multi(pairs, spec.n_patches, spec.seed)
    t0 = time.perf_counter()
    model, stats = train(dec_p, orig_p, spec,
                         log=lambda m: print(f"  {m}", flush=True))
    print(f"  training took {time.perf_counter() - t0:.0f}s; "
          f"patch-val gain {stats['val_gain_db']:+.3f} dB")
    return model, held_orig, held_dec


def test_desk_scale_gain(trained_setup):
    with criterion("CNN desk-scale gain >= 0.2 dB on held-out slice"):
        model, held_orig, held_dec = trained_setup
        rec = reconstruct(held_dec, model)
        z0 = 4  # central 8-band slice of the held-out scene
        sl = slice(z0, z0 + 8)
        snr_dec = _snr(held_orig[sl], held_dec[sl])
        snr_rec = _snr(held_orig[sl], rec[sl])
        print(f"  held-out slice SNR: decoded {snr_dec:.3f} dB, "
              f"reconstructed {snr_rec:.3f} dB (gain {snr_rec - snr_dec:+.3f})")
        assert snr_rec >= snr_dec + 0.2


def test_bin_consistency_exhaustive(trained_setup):
    with criterion("CNN bin consistency: |rec-dec| <= delta, "
                   "|rec-orig| <= 2*delta, exhaustive"):
        model, held_orig, held_dec = trained_setup
        rec = reconstruct(held_dec, model)
        dev = np.abs(rec.astype(np.int64) - held_dec.astype(np.int64))
        assert int(dev.max()) <= DELTA  # inside every quantization bin
        err = np.abs(rec.astype(np.int64) - held_orig.astype(np.int64))
        assert int(err.max()) <= 2 * DELTA


def test_clip_contract_cross_component():
    with criterion("clip layer matches compressor vectors bit-for-bit"):
        lines = CLIP_VECTORS.read_text().strip().splitlines()
        assert lines[0] == "E,decoded,delta_or_r,mode,expected"
        checked = 0
        for line in lines[1:]:
            e, decoded, param, mode, expected = line.split(",")
            out = clip_layer(np.array([float(e)]),
                             np.array([float(decoded)]), mode, float(param))
            assert float(out[0]) == float(expected), line
            checked += 1
        assert checked > 400
