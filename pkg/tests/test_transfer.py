import numpy as np
import pytest

from cdmap.geometry import Plane
from cdmap.transfer import (
    MapperState,
    TransferError,
    VARIANT_ENDPOINT,
    VARIANT_LITERAL,
    ZMappingParams,
    ZScaleState,
    cd_ratio,
    env_point_after,
    map_direct,
    map_scaled,
    zmap_gain,
    zmap_step,
    zscale_step,
)

ID5_PARAMS = ZMappingParams(h_min=0.0, h_max=0.10, input_span=0.10, output_span=0.50)


class TestCdRatio:
    def test_identity(self):
        assert cd_ratio(1.0, 1.0).value == 1.0

    def test_small_ratio(self):
        assert cd_ratio(1.0, 5.0).value == pytest.approx(0.2)

    def test_scale_invariance(self):
        assert cd_ratio(0.1, 0.5).value == pytest.approx(0.2)

    def test_zero_display_rejected(self):
        with pytest.raises(TransferError):
            cd_ratio(1.0, 0.0)


class TestDirectAndScaled:
    def test_direct_origin(self):
        assert np.allclose(map_direct([0, 0]), [0, 0])

    def test_direct_identity(self):
        assert np.allclose(map_direct([0.03, -0.01]), [0.03, -0.01])

    def test_direct_identity_many(self):
        rng = np.random.default_rng(0)
        pts = rng.normal(size=(10_000, 2))
        for p in pts[:100]:
            assert np.array_equal(map_direct(p), p)

    def test_scaled_unit_gain(self):
        assert np.allclose(map_scaled([1, 2], 1.0), [1, 2])

    def test_scaled_half(self):
        assert np.allclose(map_scaled([1, 2], 0.5), [0.5, 1.0])

    def test_scaled_five(self):
        assert np.allclose(map_scaled([0.02, 0], 5.0), [0.1, 0])

    def test_nonpositive_gain_rejected(self):
        with pytest.raises(TransferError):
            map_scaled([1, 1], 0.0)

    def test_gain_recovered_via_cd_ratio(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            g = rng.uniform(0.1, 10.0)
            p = rng.normal(size=2)
            motor = float(np.linalg.norm(p))
            display = float(np.linalg.norm(map_scaled(p, g)))
            if display > 0:
                assert abs(cd_ratio(motor, display).value - 1.0 / g) < 1e-12


class TestZmapGain:
    def test_surface_contact_is_one(self):
        assert zmap_gain(ID5_PARAMS.h_min, ID5_PARAMS) == 1.0

    def test_full_height(self):
        assert zmap_gain(0.10, ID5_PARAMS) == pytest.approx(5.0)

    def test_midpoint(self):
        assert zmap_gain(0.05, ID5_PARAMS) == pytest.approx(3.0)

    def test_out_of_range_clamped(self):
        assert zmap_gain(-1.0, ID5_PARAMS) == 1.0
        assert zmap_gain(9.0, ID5_PARAMS) == pytest.approx(5.0)

    def test_monotone_both_variants(self):
        lit = ZMappingParams(0.0, 0.10, 0.10, 0.50, variant=VARIANT_LITERAL)
        zs = np.linspace(-0.05, 0.15, 200)
        for params in (ID5_PARAMS, lit):
            gains = [zmap_gain(z, params) for z in zs]
            assert all(a <= b + 1e-15 for a, b in zip(gains, gains[1:]))
            assert min(gains) > 0

    def test_invalid_params(self):
        with pytest.raises(TransferError):
            ZMappingParams(h_min=0.1, h_max=0.1, input_span=0.1, output_span=0.5)
        with pytest.raises(TransferError):
            ZMappingParams(h_min=0.0, h_max=0.1, input_span=0.5, output_span=0.1)


class TestZmapStep:
    def prime(self, f0=(0.0, 0.0), p0=(0.0, 0.0, 0.0)):
        state, _ = zmap_step(MapperState.at(f0), p0, ID5_PARAMS)
        return state

    def test_first_call_emits_no_motion(self):
        state, f = zmap_step(MapperState.at((0.3, 0.4)), [1, 2, 3], ID5_PARAMS)
        assert np.allclose(f, [0.3, 0.4])
        assert state.initialized

    def test_pure_vertical_motion_bitwise_unchanged(self):
        state = self.prime(f0=(0.123456, -0.654321))
        before = state.f_prev.tobytes()
        state, f = zmap_step(state, [0.0, 0.0, 0.05], ID5_PARAMS)
        assert f.tobytes() == before

    def test_gain_five_at_max_height(self):
        state = self.prime()
        _, f = zmap_step(state, [0.02, 0.0, 0.10], ID5_PARAMS)
        assert np.allclose(f, [0.1, 0.0], atol=1e-12)

    def test_unit_gain_at_surface(self):
        state = self.prime()
        _, f = zmap_step(state, [0.02, 0.0, 0.0], ID5_PARAMS)
        assert np.allclose(f, [0.02, 0.0], atol=1e-15)

    @pytest.mark.parametrize("steps", [1, 7, 100])
    def test_endpoint_property(self, steps):
        # a full-span stroke at z=h_max accumulates the full output span
        state = self.prime(p0=(0.0, 0.0, 0.10))
        for i in range(1, steps + 1):
            x = ID5_PARAMS.input_span * i / steps
            state, f = zmap_step(state, [x, 0.0, 0.10], ID5_PARAMS)
        assert abs(f[0] - ID5_PARAMS.output_span) < 1e-9

    def test_degenerates_to_direct_with_unit_span_ratio(self):
        params = ZMappingParams(0.0, 0.10, 0.10, 0.10)
        state, _ = zmap_step(MapperState.at(), [0, 0, 0], params)
        rng = np.random.default_rng(2)
        p = np.zeros(3)
        total_motor = np.zeros(2)
        for _ in range(100):
            step = rng.normal(size=3) * 0.01
            p = p + step
            total_motor += step[:2]
            state, f = zmap_step(state, p, params)
        assert np.allclose(f, total_motor, atol=1e-12)

    def test_display_bounds_clamp(self):
        state = self.prime()
        _, f = zmap_step(
            state, [1.0, 0.0, 0.10], ID5_PARAMS, display_bounds=((-0.25, -0.14), (0.25, 0.14))
        )
        assert f[0] == 0.25


SCREEN = Plane(center=[0, 0, 0], normal=[0, 0, 1])


class TestZScale:
    def test_same_scale_is_noop(self):
        state = ZScaleState(scale=0.7)
        assert zscale_step(state, 0.7, [2, 0, 1], SCREEN) is state

    def test_hand_computed_example(self):
        state = ZScaleState(scale=1.0)
        state = zscale_step(state, 0.5, [2, 0, 1], SCREEN)
        # center (plus accumulated translation) moved to (1,0,0) ...
        assert np.allclose(state.center + state.translation, [1, 0, 0])
        # ... so the environment point at (2,0,0) still renders at (2,0,0)
        assert np.allclose(env_point_after(state, [2, 0, 0]), [2, 0, 0], atol=1e-12)

    def test_zoom_back_restores_center(self):
        state = ZScaleState(scale=1.0)
        state = zscale_step(state, 0.5, [2, 0, 1], SCREEN)
        state = zscale_step(state, 1.0, [2, 0, 1], SCREEN)
        assert np.allclose(state.translation, [0, 0, 0], atol=1e-12)

    def test_env_point_identity(self):
        state = ZScaleState(scale=1.0)
        assert np.allclose(env_point_after(state, [3, -1, 2]), [3, -1, 2])

    def test_env_point_scaled(self):
        state = ZScaleState(scale=0.5)
        assert np.allclose(env_point_after(state, [2, 0, 0]), [1, 0, 0])

    def test_focus_invariance_random(self):
        rng = np.random.default_rng(4)
        for _ in range(500):
            s0 = rng.uniform(0.05, 1.0)
            state = ZScaleState(scale=s0, center=rng.normal(size=3))
            p_i = rng.normal(size=3)
            s_new = rng.uniform(0.05, 1.0)
            p_f = p_i - np.dot(p_i - SCREEN.center, SCREEN.normal) * SCREEN.normal
            q = (p_f - state.center - state.translation) / state.scale + state.center
            before = env_point_after(state, q)
            after = env_point_after(zscale_step(state, s_new, p_i, SCREEN), q)
            assert np.linalg.norm(after - before) < 1e-9

    def test_two_step_composition(self):
        rng = np.random.default_rng(8)
        for _ in range(200):
            state = ZScaleState(scale=rng.uniform(0.1, 1.0), center=rng.normal(size=3))
            p_i = rng.normal(size=3)
            s1, s2 = rng.uniform(0.05, 1.0, size=2)
            two = zscale_step(zscale_step(state, s1, p_i, SCREEN), s2, p_i, SCREEN)
            one = zscale_step(state, s2, p_i, SCREEN)
            assert abs(two.scale - one.scale) < 1e-12
            assert np.allclose(two.translation, one.translation, atol=1e-9)

    def test_invalid_scale(self):
        state = ZScaleState()
        with pytest.raises(TransferError):
            zscale_step(state, -0.5, [0, 0, 0], SCREEN)
        with pytest.raises(TransferError):
            zscale_step(state, 0.001, [0, 0, 0], SCREEN)  # below bounds
