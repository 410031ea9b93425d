"""Adaptive linear predictor over causal cube neighborhoods.

Each band keeps a weight vector in signed fixed point. A local sum of
reconstructed neighbors centers the prediction; the weighted sum of local
differences (spectral central differences, plus directional differences in
full mode) yields a predicted central difference, mapped back to a sample
value. Weights adapt with a sign-algorithm update whose rate decays on a
fixed schedule.

This module is the scalar reference semantics; the fused fast loops in
``kernels`` must match it bit for bit (see tests).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

WEIGHT_FRAC_BITS = 13
WEIGHT_SCALE = 1 << WEIGHT_FRAC_BITS
WEIGHT_MIN = -(1 << 16)
WEIGHT_MAX = (1 << 16) - 1
V_MIN = 2
V_MAX = 9

PRED_MODES = ("full", "reduced")
LOCAL_SUM_MODES = ("wide", "narrow")


@dataclass(frozen=True)
class PredictorConfig:
    """Static predictor setup; s_mid is 2**(bit_depth-1) of the coded cube."""

    mode: str = "full"
    local_sum: str = "wide"
    p_bands: int = 3
    s_mid: int = 1 << 15
    weight_frac_bits: int = WEIGHT_FRAC_BITS

    def __post_init__(self):
        if self.mode not in PRED_MODES:
            raise ValueError(f"mode must be one of {PRED_MODES}")
        if self.local_sum not in LOCAL_SUM_MODES:
            raise ValueError(f"local_sum must be one of {LOCAL_SUM_MODES}")
        if self.p_bands < 0:
            raise ValueError("p_bands must be >= 0")

    @property
    def n_directional(self) -> int:
        return 3 if self.mode == "full" else 0

    def weight_length(self) -> int:
        return self.n_directional + self.p_bands

    def effective_length(self, z: int) -> int:
        """Diff-vector length at band z: previous bands truncate to those present."""
        return self.n_directional + min(z, self.p_bands)


@dataclass
class PredictorState:
    """Per-band adaptive weights plus the update-rate schedule counters.

    Weights are integers scaled by 2**weight_frac_bits; t counts samples
    coded in this band and t_inc sets how often the rate exponent steps.
    """

    weights: np.ndarray
    t: int = 0
    t_inc: int = 256

    def copy(self) -> "PredictorState":
        return PredictorState(self.weights.copy(), self.t, self.t_inc)


@dataclass(frozen=True)
class Neighborhood:
    """Causal reconstructed samples around position (x, y, z).

    Absent positions (outside the image, or excluded by the narrow mode's
    no-left-neighbor rule) are None. prev_central holds the central local
    differences of bands z-1, z-2, ... at this same (x, y), newest first.
    """

    x: int
    y: int
    z: int
    w: int | None = None            # (x-1, y,   z)
    nw: int | None = None           # (x-1, y-1, z)
    n: int | None = None            # (x,   y-1, z)
    ne: int | None = None           # (x+1, y-1, z)
    w_prev: int | None = None       # (x-1, y,   z-1)
    colocated_prev: int | None = None   # (x, y, z-1)
    prev_central: tuple[int, ...] = ()


def _require(value: int | None, name: str, nbhd: Neighborhood) -> int:
    if value is None:
        raise ValueError(
            f"local sum at (x={nbhd.x}, y={nbhd.y}, z={nbhd.z}) requires the "
            f"{name} neighbor, which is not populated"
        )
    return value


def local_sum(nbhd: Neighborhood, x: int, y: int, z: int,
              cfg: PredictorConfig) -> int:
    """Case-matched weighted sum of causal neighbors (wide or narrow mode).

    Single-column images (no NE neighbor at x=0) and the first sample of a
    band fall back to 4x the north / previous-band co-located sample / mid-
    range value, in that order of availability.
    """
    narrow = cfg.local_sum == "narrow"
    if y > 0:
        if x == 0:
            if nbhd.ne is None:  # single-column image
                return 4 * _require(nbhd.n, "N", nbhd)
            return 2 * (_require(nbhd.n, "N", nbhd) + nbhd.ne)
        if nbhd.ne is None:  # last column
            if narrow:
                return 2 * (_require(nbhd.nw, "NW", nbhd) + _require(nbhd.n, "N", nbhd))
            return (_require(nbhd.w, "W", nbhd) + _require(nbhd.nw, "NW", nbhd)
                    + 2 * _require(nbhd.n, "N", nbhd))
        if narrow:
            return (_require(nbhd.nw, "NW", nbhd) + 2 * _require(nbhd.n, "N", nbhd)
                    + nbhd.ne)
        return (_require(nbhd.w, "W", nbhd) + _require(nbhd.nw, "NW", nbhd)
                + _require(nbhd.n, "N", nbhd) + nbhd.ne)
    # first line of the band
    if x > 0:
        if narrow:
            if z == 0:
                return 4 * cfg.s_mid
            return 4 * _require(nbhd.w_prev, "W of previous band", nbhd)
        return 4 * _require(nbhd.w, "W", nbhd)
    # first sample of the band
    if z > 0:
        return 4 * _require(nbhd.colocated_prev, "previous-band co-located", nbhd)
    return 4 * cfg.s_mid


def central_difference(sample: int, lsum: int) -> int:
    return 4 * sample - lsum


def local_differences(nbhd: Neighborhood, lsum: int,
                      cfg: PredictorConfig) -> list[int]:
    """Difference vector matching the band's weight vector.

    Reduced mode: previous-band central differences only. Full mode prefixes
    the three directional differences (N, W, NW); on the first line they are
    zero, and in the first column (or narrow mode, which never touches the
    same-line left neighbor) the north sample substitutes for W/NW.
    """
    prev = list(nbhd.prev_central[:cfg.p_bands])
    if cfg.mode == "reduced":
        return prev
    if nbhd.y == 0:
        return [0, 0, 0] + prev
    north = _require(nbhd.n, "N", nbhd)
    d_n = 4 * north - lsum
    if cfg.local_sum == "narrow" or nbhd.x == 0:
        d_w = 4 * north - lsum
    else:
        d_w = 4 * _require(nbhd.w, "W", nbhd) - lsum
    if nbhd.x == 0:
        d_nw = 4 * north - lsum
    else:
        d_nw = 4 * _require(nbhd.nw, "NW", nbhd) - lsum
    return [d_n, d_w, d_nw] + prev


def predict(state: PredictorState, diffs: list[int], lsum: int,
            cfg: PredictorConfig, max_value: int) -> int:
    """Fixed-point weighted prediction, mapped to a clamped sample value.

    The predicted central difference is W . diffs; the sample estimate is
    round((d_hat + lsum) / 4), round half up, clamped to [0, max_value].
    """
    acc = 0
    for i, d in enumerate(diffs):
        acc += int(state.weights[i]) * d
    num = acc + (lsum << WEIGHT_FRAC_BITS)
    s_hat = (num + (1 << (WEIGHT_FRAC_BITS + 1))) >> (WEIGHT_FRAC_BITS + 2)
    return min(max(s_hat, 0), max_value)


def rate_exponent(t: int, t_inc: int) -> int:
    """Schedule for the sign-algorithm step: 2**-v with v stepping V_MIN..V_MAX."""
    return min(V_MIN + t // t_inc, V_MAX)


def update_weights(state: PredictorState, sign: int, diffs: list[int],
                   t: int | None = None) -> PredictorState:
    """Sign-algorithm update: W += mu(t) * sign * diffs, clamped, in place.

    The product lands directly in the fixed-point weight register, i.e.
    each component moves by floor(sign * d * 2**-v) integer steps. sign
    must be -1, 0 or +1 (the sign of the prediction error in the domain
    the decoder can reproduce). t defaults to the state's counter; the
    counter advances once per call either way.
    """
    t_now = state.t if t is None else t
    if sign:
        shift = rate_exponent(t_now, state.t_inc)
        for i in range(min(len(diffs), state.weights.shape[0])):
            w = int(state.weights[i]) + ((sign * diffs[i]) >> shift)
            state.weights[i] = min(max(w, WEIGHT_MIN), WEIGHT_MAX)
    state.t = t_now + 1
    return state


def init_weights(cfg: PredictorConfig, t_inc: int = 256) -> PredictorState:
    """Deterministic start: first previous-band weight 7/8, the rest zero."""
    weights = np.zeros(cfg.weight_length(), dtype=np.int64)
    if cfg.p_bands >= 1:
        weights[cfg.n_directional] = (7 * WEIGHT_SCALE) // 8
    return PredictorState(weights=weights, t=0, t_inc=t_inc)


def neighborhood_at(bands: np.ndarray, central: np.ndarray, z: int, y: int,
                    x: int, cfg: PredictorConfig) -> Neighborhood:
    """Assemble the causal neighborhood from reconstructed band planes.

    ``bands`` is the (n_z, n_y, n_x) reconstructed array filled in coding
    order; ``central`` holds central differences at the current line for
    already-coded bands. Narrow mode omits the same-line left neighbor for
    y > 0 by construction.
    """
    n_z, n_y, n_x = bands.shape
    narrow = cfg.local_sum == "narrow"
    w = int(bands[z, y, x - 1]) if x > 0 and not narrow else None
    nw = int(bands[z, y - 1, x - 1]) if x > 0 and y > 0 else None
    n = int(bands[z, y - 1, x]) if y > 0 else None
    ne = int(bands[z, y - 1, x + 1]) if y > 0 and x + 1 < n_x else None
    w_prev = int(bands[z - 1, y, x - 1]) if x > 0 and z > 0 else None
    colocated = int(bands[z - 1, y, x]) if z > 0 else None
    n_prev = min(z, cfg.p_bands)
    prev = tuple(int(central[z - 1 - j, x]) for j in range(n_prev))
    return Neighborhood(x=x, y=y, z=z, w=w, nw=nw, n=n, ne=ne,
                        w_prev=w_prev, colocated_prev=colocated,
                        prev_central=prev)
