import numpy as np
import torch

from recon_cnn.infer import reconstruct, window_counts
from recon_cnn.model import ReconModel


def _random_model(mode, bound, seed=0):
    torch.manual_seed(seed)
    model = ReconModel(mode, bound)
    for p in model.parameters():
        torch.nn.init.normal_(p, std=0.5)
    return model


def test_window_counts_ten_bands():
    assert window_counts(10).tolist() == [1, 2, 3, 3, 3, 3, 3, 3, 2, 1]


def test_window_counts_eight_bands_single_window():
    assert window_counts(8).tolist() == [1] * 8


def test_eight_band_cube_single_window_no_averaging():
    rng = np.random.default_rng(0)
    dec = rng.integers(0, 65536, (8, 16, 16)).astype(np.uint16)
    model = _random_model("abs", 5)
    out = reconstruct(dec, model)
    assert out.shape == dec.shape
    assert np.abs(out.astype(int) - dec.astype(int)).max() <= 5


def test_overlapping_windows_stay_bin_consistent():
    rng = np.random.default_rng(1)
    dec = rng.integers(0, 65536, (12, 20, 20)).astype(np.uint16)
    model = _random_model("abs", 7, seed=2)
    out = reconstruct(dec, model)
    assert np.abs(out.astype(int) - dec.astype(int)).max() <= 7


def test_relative_mode_bin_consistent():
    rng = np.random.default_rng(2)
    dec = rng.integers(100, 65536, (10, 16, 16)).astype(np.uint16)
    model = _random_model("rel", 0.01, seed=3)
    out = reconstruct(dec, model)
    diff = np.abs(out.astype(np.float64) - dec.astype(np.float64))
    assert np.all(diff <= 0.01 * dec.astype(np.float64) + 1e-9)


def test_inference_deterministic():
    rng = np.random.default_rng(3)
    dec = rng.integers(0, 65536, (10, 16, 16)).astype(np.uint16)
    model = _random_model("abs", 5, seed=4)
    assert np.array_equal(reconstruct(dec, model), reconstruct(dec, model))


def test_too_few_bands_rejected():
    import pytest
    dec = np.zeros((7, 16, 16), dtype=np.uint16)
    with pytest.raises(ValueError, match="bands"):
        reconstruct(dec, _random_model("abs", 5))
