import numpy as np
import pytest

from recon_cnn.data import extract_patches, extract_patches_multi


def _cubes(seed=0, shape=(16, 64, 64)):
    rng = np.random.default_rng(seed)
    orig = rng.integers(0, 65536, shape).astype(np.uint16)
    dec = np.clip(orig.astype(np.int64)
                  + rng.integers(-10, 11, shape), 0, 65535).astype(np.uint16)
    return orig, dec


def test_deterministic_under_seed():
    orig, dec = _cubes()
    a = extract_patches(orig, dec, 50, seed=7)
    b = extract_patches(orig, dec, 50, seed=7)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
    assert np.array_equal(a[2], b[2])
    c = extract_patches(orig, dec, 50, seed=8)
    assert not np.array_equal(a[2], c[2])


def test_patch_values_match_recorded_offsets():
    orig, dec = _cubes(1)
    dec_p, orig_p, offsets = extract_patches(orig, dec, 25, seed=3)
    for i, (z, y, x) in enumerate(offsets):
        assert np.array_equal(orig_p[i],
                              orig[z:z + 8, y:y + 32, x:x + 32])
        assert np.array_equal(dec_p[i], dec[z:z + 8, y:y + 32, x:x + 32])


def test_requested_count_and_ranges():
    orig, dec = _cubes(2)
    dec_p, orig_p, offsets = extract_patches(orig, dec, 1000, seed=0)
    assert dec_p.shape == (1000, 8, 32, 32) == orig_p.shape
    assert offsets[:, 0].max() <= 16 - 8
    assert offsets[:, 1].max() <= 64 - 32
    assert offsets[:, 2].max() <= 64 - 32


def test_cube_smaller_than_patch_rejected():
    orig, dec = _cubes(0, shape=(4, 64, 64))
    with pytest.raises(ValueError, match="smaller"):
        extract_patches(orig, dec, 10)


def test_multi_cube_split():
    pairs = [_cubes(0), _cubes(1), _cubes(2)]
    dec_p, orig_p = extract_patches_multi(pairs, 100, seed=0)
    assert dec_p.shape[0] == orig_p.shape[0] == 100
