import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hscodec.predictor import (
    Neighborhood,
    PredictorConfig,
    PredictorState,
    WEIGHT_SCALE,
    central_difference,
    init_weights,
    local_differences,
    local_sum,
    neighborhood_at,
    predict,
    update_weights,
)

WIDE = PredictorConfig(mode="full", local_sum="wide", s_mid=32768)
NARROW = PredictorConfig(mode="full", local_sum="narrow", s_mid=32768)


class TestLocalSum:
    def test_wide_interior(self):
        nbhd = Neighborhood(x=1, y=1, z=0, w=10, nw=12, n=14, ne=16)
        assert local_sum(nbhd, 1, 1, 0, WIDE) == 52

    def test_narrow_first_line_first_band_uses_mid_range(self):
        nbhd = Neighborhood(x=1, y=0, z=0)
        assert local_sum(nbhd, 1, 0, 0, NARROW) == 4 * 32768

    def test_wide_first_line_uses_left(self):
        nbhd = Neighborhood(x=3, y=0, z=0, w=100)
        assert local_sum(nbhd, 3, 0, 0, WIDE) == 400

    def test_narrow_interior(self):
        nbhd = Neighborhood(x=1, y=1, z=0, nw=10, n=20, ne=30)
        assert local_sum(nbhd, 1, 1, 0, NARROW) == 10 + 2 * 20 + 30

    def test_narrow_first_line_previous_band(self):
        nbhd = Neighborhood(x=2, y=0, z=3, w_prev=55)
        assert local_sum(nbhd, 2, 0, 3, NARROW) == 220

    def test_first_column(self):
        nbhd = Neighborhood(x=0, y=2, z=0, n=7, ne=9)
        assert local_sum(nbhd, 0, 2, 0, WIDE) == 32
        assert local_sum(nbhd, 0, 2, 0, NARROW) == 32

    def test_last_column(self):
        wide = Neighborhood(x=3, y=1, z=0, w=5, nw=6, n=7)
        assert local_sum(wide, 3, 1, 0, WIDE) == 5 + 6 + 14
        narrow = Neighborhood(x=3, y=1, z=0, nw=6, n=7)
        assert local_sum(narrow, 3, 1, 0, NARROW) == 2 * (6 + 7)

    def test_missing_required_neighbor_rejected(self):
        nbhd = Neighborhood(x=1, y=1, z=0, nw=12, n=14, ne=16)  # no W
        with pytest.raises(ValueError, match="W neighbor"):
            local_sum(nbhd, 1, 1, 0, WIDE)

    @pytest.mark.parametrize("cfg", [WIDE, NARROW,
                                     PredictorConfig(mode="reduced",
                                                     local_sum="wide"),
                                     PredictorConfig(mode="reduced",
                                                     local_sum="narrow")])
    def test_constant_image_gives_four_times_sample(self, cfg):
        # Every neighbor-derived case; the mid-range case is excluded since
        # it reads no neighbors at all.
        bands = np.full((3, 4, 5), 321, dtype=np.int64)
        central = np.zeros((3, 5), dtype=np.int64)
        for z in range(3):
            for y in range(4):
                for x in range(5):
                    if y == 0 and (x == 0 or cfg.local_sum == "narrow") and z == 0:
                        continue
                    nbhd = neighborhood_at(bands, central, z, y, x, cfg)
                    assert local_sum(nbhd, x, y, z, cfg) == 4 * 321


class TestLocalDifferences:
    def test_central_difference(self):
        assert central_difference(20, 52) == 28

    def test_first_band_reduced_is_empty(self):
        cfg = PredictorConfig(mode="reduced")
        nbhd = Neighborhood(x=1, y=1, z=0, w=1, nw=1, n=1, ne=1)
        assert local_differences(nbhd, 4, cfg) == []

    def test_full_interior_length(self):
        cfg = PredictorConfig(mode="full", p_bands=3)
        nbhd = Neighborhood(x=1, y=1, z=5, w=10, nw=12, n=14, ne=16,
                            prev_central=(1, 2, 3))
        diffs = local_differences(nbhd, 52, cfg)
        assert len(diffs) == 6
        assert diffs == [4 * 14 - 52, 4 * 10 - 52, 4 * 12 - 52, 1, 2, 3]

    def test_first_line_directionals_are_zero(self):
        cfg = PredictorConfig(mode="full", p_bands=3)
        nbhd = Neighborhood(x=2, y=0, z=2, w=9, prev_central=(5, 6))
        assert local_differences(nbhd, 36, cfg) == [0, 0, 0, 5, 6]

    def test_narrow_substitutes_north_for_west(self):
        cfg = PredictorConfig(mode="full", local_sum="narrow")
        nbhd = Neighborhood(x=2, y=1, z=0, nw=12, n=14, ne=16)
        d = local_differences(nbhd, 52, cfg)
        assert d[1] == 4 * 14 - 52  # W replaced by N: left neighbor untouched


class TestPredict:
    def test_weighted_example(self):
        state = PredictorState(np.array([WEIGHT_SCALE // 2, WEIGHT_SCALE // 4],
                                        dtype=np.int64))
        cfg = PredictorConfig(mode="reduced", p_bands=2)
        assert predict(state, [28, 4], 52, cfg, 65535) == 17

    def test_zero_weights_round_local_sum(self):
        cfg = PredictorConfig(mode="reduced", p_bands=2)
        state = PredictorState(np.zeros(2, dtype=np.int64))
        assert predict(state, [28, 4], 52, cfg, 65535) == 13
        assert predict(state, [], 54, cfg, 65535) == 14  # round half up

    def test_flat_region_predicts_constant(self):
        cfg = PredictorConfig(mode="full", p_bands=3)
        rng = np.random.default_rng(1)
        for _ in range(20):
            state = PredictorState(rng.integers(-65536, 65536, 6))
            c = int(rng.integers(0, 65536))
            assert predict(state, [0] * 6, 4 * c, cfg, 65535) == c

    @given(st.lists(st.integers(-(1 << 18), 1 << 18), min_size=0, max_size=6),
           st.integers(0, 4 * 65535), st.integers(0, 2000))
    @settings(max_examples=200, deadline=None)
    def test_prediction_always_in_range(self, diffs, lsum, seed):
        rng = np.random.default_rng(seed)
        state = PredictorState(rng.integers(-65536, 65536, max(len(diffs), 1)))
        cfg = PredictorConfig(mode="full", p_bands=3)
        assert 0 <= predict(state, diffs, lsum, cfg, 65535) <= 65535


class TestUpdateWeights:
    def test_zero_sign_leaves_weights(self):
        state = init_weights(PredictorConfig(mode="reduced", p_bands=3))
        before = state.weights.copy()
        update_weights(state, 0, [100, 200, 300], t=0)
        assert np.array_equal(state.weights, before)
        assert state.t == 1

    def test_step_is_diff_over_sixteen(self):
        # mu = 2^-4 reached at t = 2 * t_inc
        state = PredictorState(np.zeros(1, dtype=np.int64), t_inc=256)
        update_weights(state, +1, [160], t=512)
        assert state.weights[0] == 10

    def test_clamped_at_register_range(self):
        state = PredictorState(np.array([65530], dtype=np.int64), t_inc=256)
        update_weights(state, +1, [1 << 12], t=0)
        assert state.weights[0] == 65535
        state = PredictorState(np.array([-65530], dtype=np.int64), t_inc=256)
        update_weights(state, -1, [1 << 12], t=0)
        assert state.weights[0] == -65536

    def test_error_trend_on_linear_relation(self):
        # d_t = 0.9 * x_t + noise; sign updates must drive the block-mean
        # error magnitude down and keep it non-increasing after burn-in.
        rng = np.random.default_rng(7)
        state = PredictorState(np.zeros(1, dtype=np.int64), t_inc=256)
        n, block = 10_000, 2000
        xs = rng.normal(0, 500, n)
        ds = 0.9 * xs + rng.normal(0, 10, n)
        errors = np.empty(n)
        for t in range(n):
            x = int(round(xs[t]))
            d_hat = (int(state.weights[0]) * x) >> 13
            err = ds[t] - d_hat
            errors[t] = abs(err)
            sign = 1 if err > 0 else (-1 if err < 0 else 0)
            update_weights(state, sign, [x], t=t)
        block_means = errors.reshape(-1, block).mean(axis=1)
        unadapted = np.abs(ds).mean()  # error with weights frozen at zero
        assert block_means[-1] < unadapted / 10
        burned = block_means[1:]  # settled blocks: flat within sampling noise
        assert np.all(np.diff(burned) <= 0.10 * burned[:-1])
        assert abs(state.weights[0] / WEIGHT_SCALE - 0.9) < 0.05


class TestInitWeights:
    def test_reduced(self):
        state = init_weights(PredictorConfig(mode="reduced", p_bands=3))
        assert state.weights.tolist() == [7 * WEIGHT_SCALE // 8, 0, 0]

    def test_full(self):
        state = init_weights(PredictorConfig(mode="full", p_bands=3))
        assert state.weights.tolist() == [0, 0, 0, 7 * WEIGHT_SCALE // 8, 0, 0]

    def test_no_previous_bands(self):
        state = init_weights(PredictorConfig(mode="reduced", p_bands=0))
        assert state.weights.size == 0


def test_narrow_neighborhoods_never_carry_left_neighbor():
    bands = np.arange(3 * 4 * 5, dtype=np.int64).reshape(3, 4, 5)
    central = np.zeros((3, 5), dtype=np.int64)
    for z in range(3):
        for y in range(4):
            for x in range(5):
                nbhd = neighborhood_at(bands, central, z, y, x, NARROW)
                assert nbhd.w is None
                local_sum(nbhd, x, y, z, NARROW)  # must not need it either
