"""MSE training of the reconstruction network on paired patches."""

from __future__ import annotations

import numpy as np
import torch

from .data import TrainSpec
from .model import SAMPLE_SCALE, ReconModel


def train(dec_patches: np.ndarray, orig_patches: np.ndarray,
          spec: TrainSpec, log=None) -> tuple[ReconModel, dict]:
    """Train one model for the TrainSpec's (pipeline, quality point).

    Patches are in digital numbers; training runs in normalized units.
    Keeps the best-validation weights, so held-out MSE after training can
    never exceed the untrained (identity) MSE. Aborts on non-finite loss.
    Returns (model, stats).
    """
    if dec_patches.shape != orig_patches.shape or dec_patches.ndim != 4:
        raise ValueError("expected matching (N, bands, h, w) patch arrays")
    if dec_patches.shape[0] < 2:
        raise ValueError("need at least two patches")
    torch.manual_seed(spec.seed)
    dec = torch.from_numpy(np.ascontiguousarray(
        dec_patches, dtype=np.float32)) / SAMPLE_SCALE
    orig = torch.from_numpy(np.ascontiguousarray(
        orig_patches, dtype=np.float32)) / SAMPLE_SCALE

    n_val = max(1, int(dec.shape[0] * spec.val_fraction))
    val_dec, val_orig = dec[:n_val], orig[:n_val]
    train_dec, train_orig = dec[n_val:], orig[n_val:]

    model = ReconModel(spec.mode, spec.bound)
    opt = torch.optim.Adam(model.parameters(), lr=spec.lr)

    def val_mse() -> float:
        # digital-number units: keeps magnitudes well inside optimizer and
        # float32 working ranges (normalized-unit MSE sits near Adam's eps)
        model.eval()
        with torch.no_grad():
            return float((((model(val_dec) - val_orig)
                           * SAMPLE_SCALE) ** 2).mean())

    initial = val_mse()  # identity baseline: the tail starts at zero
    best = initial
    best_state = {k: v.clone() for k, v in model.state_dict().items()}
    history = [initial]
    n_train = train_dec.shape[0]
    for epoch in range(spec.epochs):
        model.train()
        perm = torch.randperm(n_train)
        for start in range(0, n_train, spec.batch_size):
            idx = perm[start:start + spec.batch_size]
            opt.zero_grad()
            loss = (((model(train_dec[idx]) - train_orig[idx])
                     * SAMPLE_SCALE) ** 2).mean()
            if not torch.isfinite(loss):
                raise RuntimeError(
                    f"training diverged at epoch {epoch}: loss={loss.item()} "
                    f"(lr={spec.lr}, batch={spec.batch_size})")
            loss.backward()
            opt.step()
        current = val_mse()
        history.append(current)
        if current < best:
            best = current
            best_state = {k: v.clone() for k, v in model.state_dict().items()}
        if log:
            log(f"epoch {epoch + 1}/{spec.epochs}: val mse {current:.3e} "
                f"(best {best:.3e}, identity {initial:.3e})")

    model.load_state_dict(best_state)
    model.eval()
    stats = {
        "val_mse_identity": initial,
        "val_mse_final": best,
        "val_gain_db": float(10 * np.log10(initial / best)) if best > 0 else 0.0,
        "history": history,
        "n_train": int(n_train),
        "n_val": int(n_val),
    }
    return model, stats
