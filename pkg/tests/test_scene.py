import numpy as np
import pytest

from evmeshflow import (
    DataError,
    MotionSpec,
    ParameterError,
    RangeError,
    Scene,
    StepLimitError,
    adaptive_timestamps,
    flow_at_points,
    flow_between,
    render_frame,
    scene_texture,
    seeded_rng,
    velocity_field,
)


def _translation_scene(vx=2.0, vy=1.0, seed=5, size=16):
    return Scene(size, size, seed, MotionSpec("translation", (vx, vy)))


def _affine_scene(seed=5, size=16):
    gen = (0.05, -0.02, 1.5, 0.03, -0.04, -0.8)
    return Scene(size, size, seed, MotionSpec("affine", gen))


class TestMotionSpec:
    def test_unknown_kind_rejected(self):
        with pytest.raises(ParameterError):
            MotionSpec("spline", (1.0, 2.0))

    def test_translation_coefficient_counts(self):
        MotionSpec("translation", (1.0, 2.0))
        MotionSpec("translation", (1.0, 2.0, 0.5, 0.5))
        with pytest.raises(ParameterError):
            MotionSpec("translation", (1.0,))

    def test_matrix_coefficient_counts(self):
        MotionSpec("affine", (0.0,) * 6)
        MotionSpec("homography", (0.0,) * 8)
        with pytest.raises(ParameterError):
            MotionSpec("affine", (0.0,) * 5)
        with pytest.raises(ParameterError):
            MotionSpec("homography", (0.0,) * 6)

    def test_non_finite_coefficients_rejected(self):
        with pytest.raises(ParameterError):
            MotionSpec("translation", (np.nan, 0.0))

    def test_translation_has_no_generator(self):
        with pytest.raises(ParameterError):
            MotionSpec("translation", (1.0, 0.0)).generator()


class TestScene:
    def test_dimensions_validated(self):
        with pytest.raises(ParameterError):
            Scene(4, 16, 0, MotionSpec("translation", (0.0, 0.0)))
        with pytest.raises(ParameterError):
            Scene(16, 7, 0, MotionSpec("translation", (0.0, 0.0)))

    def test_time_ordering_validated(self):
        with pytest.raises(ParameterError):
            Scene(
                16, 16, 0, MotionSpec("translation", (0.0, 0.0)),
                t_start=1.0, t_end=0.5,
            )

    def test_out_of_range_time_rejected(self):
        scene = _translation_scene()
        with pytest.raises(RangeError):
            render_frame(scene, 1.5)
        with pytest.raises(RangeError):
            flow_between(scene, -0.1, 0.5)


class TestTexture:
    def test_deterministic_for_seed(self):
        a = scene_texture(_translation_scene(seed=9))
        b = scene_texture(_translation_scene(seed=9))
        assert np.array_equal(a, b)

    def test_seed_changes_texture(self):
        a = scene_texture(_translation_scene(seed=1))
        b = scene_texture(_translation_scene(seed=2))
        assert not np.array_equal(a, b)

    def test_range_spans_floor_to_one(self):
        scene = _translation_scene()
        tex = scene_texture(scene)
        assert tex.min() == pytest.approx(scene.intensity_floor)
        assert tex.max() == pytest.approx(1.0)

    def test_rng_streams_are_independent(self):
        a = seeded_rng(3, 0).standard_normal(8)
        b = seeded_rng(3, 1).standard_normal(8)
        c = seeded_rng(3, 0).standard_normal(8)
        assert np.array_equal(a, c)
        assert not np.array_equal(a, b)


class TestRenderFrame:
    def test_same_time_bit_identical(self):
        scene = _translation_scene()
        assert np.array_equal(render_frame(scene, 0.3), render_frame(scene, 0.3))

    def test_static_scene_constant_in_time(self):
        scene = _translation_scene(0.0, 0.0)
        assert np.array_equal(render_frame(scene, 0.0), render_frame(scene, 1.0))

    def test_unit_translation_shifts_columns(self):
        scene = _translation_scene(1.0, 0.0)
        f0 = render_frame(scene, 0.0)
        f1 = render_frame(scene, 1.0)
        assert np.allclose(f1[:, 1:], f0[:, :-1], atol=1e-12)

    def test_values_respect_floor(self):
        scene = _translation_scene()
        frame = render_frame(scene, 0.4)
        assert frame.min() >= scene.intensity_floor - 1e-12
        assert frame.max() <= 1.0 + 1e-12


class TestFlowBetween:
    def test_translation_constant_flow(self):
        flow = flow_between(_translation_scene(2.0, 1.0), 0.0, 1.0)
        assert np.allclose(flow[..., 0], 2.0)
        assert np.allclose(flow[..., 1], 1.0)

    def test_equal_times_zero_flow(self):
        flow = flow_between(_affine_scene(), 0.4, 0.4)
        assert np.allclose(flow, 0.0, atol=1e-12)

    def test_affine_matches_point_tracking_oracle(self):
        scene = _affine_scene()
        rng = seeded_rng(42)
        xs = rng.uniform(0, scene.width - 1, 8)
        ys = rng.uniform(0, scene.height - 1, 8)
        fx, fy = flow_at_points(scene, 0.0, 1.0, xs, ys)
        g = scene.motion.generator()
        # forward-integrate du/dt = G[:2].[u,1] - u * (G[2].[u,1]) with RK4
        steps = 2000
        dt = 1.0 / steps
        px, py = xs.copy(), ys.copy()

        def vel(px, py):
            d0 = g[0, 0] * px + g[0, 1] * py + g[0, 2]
            d1 = g[1, 0] * px + g[1, 1] * py + g[1, 2]
            d2 = g[2, 0] * px + g[2, 1] * py + g[2, 2]
            return d0 - px * d2, d1 - py * d2

        for _ in range(steps):
            k1x, k1y = vel(px, py)
            k2x, k2y = vel(px + 0.5 * dt * k1x, py + 0.5 * dt * k1y)
            k3x, k3y = vel(px + 0.5 * dt * k2x, py + 0.5 * dt * k2y)
            k4x, k4y = vel(px + dt * k3x, py + dt * k3y)
            px = px + dt * (k1x + 2 * k2x + 2 * k3x + k4x) / 6
            py = py + dt * (k1y + 2 * k2y + 2 * k3y + k4y) / 6
        assert np.allclose(fx, px - xs, atol=1e-6)
        assert np.allclose(fy, py - ys, atol=1e-6)

    def test_homography_flow_round_trip(self):
        gen = (0.02, -0.01, 0.8, 0.015, 0.03, -0.5, 1e-4, -2e-4)
        scene = Scene(16, 16, 3, MotionSpec("homography", gen))
        fwd = flow_between(scene, 0.0, 1.0)
        ys, xs = np.mgrid[0:16, 0:16].astype(float)
        bx, by = flow_at_points(
            scene, 1.0, 0.0, xs + fwd[..., 0], ys + fwd[..., 1]
        )
        assert np.allclose(fwd[..., 0] + bx, 0.0, atol=1e-9)
        assert np.allclose(fwd[..., 1] + by, 0.0, atol=1e-9)

    def test_trajectory_composition(self):
        scene = _affine_scene()
        ys, xs = np.mgrid[0:16, 0:16].astype(float)
        fab = flow_between(scene, 0.0, 0.4)
        fbc_x, fbc_y = flow_at_points(
            scene, 0.4, 1.0, xs + fab[..., 0], ys + fab[..., 1]
        )
        fac = flow_between(scene, 0.0, 1.0)
        assert np.allclose(fac[..., 0], fab[..., 0] + fbc_x, atol=1e-5)
        assert np.allclose(fac[..., 1], fab[..., 1] + fbc_y, atol=1e-5)

    def test_velocity_field_matches_flow_derivative(self):
        scene = _affine_scene()
        eps = 1e-6
        vel = velocity_field(scene, 0.5)
        flow = flow_between(scene, 0.5, 0.5 + eps)
        assert np.allclose(vel, flow / eps, atol=1e-4)


class TestAdaptiveTimestamps:
    def test_constant_speed_ten_gives_eleven_stamps(self):
        scene = Scene(16, 16, 0, MotionSpec("translation", (10.0, 0.0)))
        times = adaptive_timestamps(scene, 0.0, 1.0)
        assert len(times) == 11
        assert times[0] == 0.0
        assert times[-1] == 1.0
        assert np.allclose(np.diff(times), 0.1)

    def test_zero_motion_gives_endpoints(self):
        scene = _translation_scene(0.0, 0.0)
        assert adaptive_timestamps(scene, 0.0, 1.0) == [0.0, 1.0]

    def test_strictly_increasing_and_bracketing(self):
        scene = _affine_scene()
        times = adaptive_timestamps(scene, 0.0, 1.0)
        assert times[0] == 0.0
        assert times[-1] == 1.0
        assert np.all(np.diff(times) > 0)

    def test_displacement_bound_holds_both_directions(self):
        scene = _affine_scene()
        times = adaptive_timestamps(scene, 0.0, 1.0)
        for ta, tb in zip(times, times[1:]):
            for a, b in ((ta, tb), (tb, ta)):
                flow = flow_between(scene, a, b)
                disp = np.hypot(flow[..., 0], flow[..., 1]).max()
                assert disp <= 1.0 + 1e-9

    def test_requires_forward_interval(self):
        scene = _translation_scene()
        with pytest.raises(ParameterError):
            adaptive_timestamps(scene, 0.5, 0.5)

    def test_step_cap_raises(self):
        scene = _translation_scene(1e6, 0.0)
        with pytest.raises(StepLimitError):
            adaptive_timestamps(scene, 0.0, 1.0, max_steps=50)


class TestHomographyDegeneracy:
    def test_vanishing_depth_raises(self):
        gen = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -0.5, -0.5)
        scene = Scene(16, 16, 0, MotionSpec("homography", gen))
        with pytest.raises(DataError):
            flow_between(scene, 0.0, 1.0)
