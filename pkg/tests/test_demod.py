import dataclasses
import math

import numpy as np
import pytest

import qreadout as qr
from qreadout.demod import (
    FeatureVector,
    Trajectory,
    as_feature_matrix,
    hann_kernel,
    smooth_series,
)
from qreadout.errors import ConfigError
from qreadout.simulate import RawShot


def tone_shot(amplitude, phase, f_if_hz=62.5e6, duration_ns=800.0, sample_rate_hz=1e9, label=0):
    n = int(round(duration_ns * sample_rate_hz / 1e9))
    tau = (np.arange(n) + 0.5) * (1e9 / sample_rate_hz)
    samples = amplitude * np.cos(2 * np.pi * f_if_hz * tau * 1e-9 + phase)
    return RawShot(
        samples=samples,
        prepared_label=label,
        actual_initial_state=label,
        decay_events=(),
        duration_ns=duration_ns,
    )


class TestFullDemod:
    def test_zero_signal(self):
        shot = tone_shot(0.0, 0.0)
        assert qr.full_demod(shot, 62.5e6) == (0.0, 0.0)

    def test_closed_form_tone(self):
        # (I, Q) = (A cos phi, A sin phi); cross-checked against a 10x
        # oversampled quadrature of the same integrand
        a, phi = 2.0, math.pi / 3
        shot = tone_shot(a, phi)
        point = qr.full_demod(shot, 62.5e6)
        assert abs(point.i - 1.0) < 1e-6
        assert abs(point.q - math.sqrt(3.0)) < 1e-6

        fine = tone_shot(a, phi, sample_rate_hz=1e10)
        fine_point = qr.full_demod(fine, 62.5e6)
        assert abs(point.i - fine_point.i) < 1e-6
        assert abs(point.q - fine_point.q) < 1e-6

    def test_tone_at_double_frequency_is_orthogonal(self):
        shot = tone_shot(1.0, 0.0, f_if_hz=125e6)
        point = qr.full_demod(shot, 62.5e6)
        assert abs(point.i) < 1e-6
        assert abs(point.q) < 1e-6

    def test_rejects_partial_period(self):
        shot = tone_shot(1.0, 0.0, duration_ns=808.0)
        with pytest.raises(ConfigError):
            qr.full_demod(shot, 62.5e6)

    def test_linearity(self, rng):
        # linear in the record; float rounding differs only at machine level
        n = 800
        r1 = rng.normal(size=n)
        r2 = rng.normal(size=n)
        alpha, beta = 2.5, -1.25

        def demod(samples):
            shot = RawShot(samples, 0, 0, (), 800.0)
            return np.array(qr.full_demod(shot, 62.5e6))

        combined = demod(alpha * r1 + beta * r2)
        np.testing.assert_allclose(
            combined, alpha * demod(r1) + beta * demod(r2), rtol=1e-12, atol=1e-15
        )


class TestSlicedDemod:
    @pytest.mark.parametrize("tm,expected_c", [(800.0, 50), (8000.0, 500)])
    def test_slice_counts(self, tm, expected_c):
        shot = tone_shot(1.0, 0.2, duration_ns=tm)
        traj = qr.sliced_demod(shot, 62.5e6, 16.0)
        assert len(traj) == expected_c

    def test_stationary_tone_slices_equal_full(self):
        shot = tone_shot(1.5, 0.7)
        traj = qr.sliced_demod(shot, 62.5e6, 16.0)
        full = qr.full_demod(shot, 62.5e6)
        np.testing.assert_allclose(traj.i_series, full.i, atol=1e-9)
        np.testing.assert_allclose(traj.q_series, full.q, atol=1e-9)

    def test_time_average_equals_full_demod(self):
        # the slices partition the same Riemann sum
        shot = qr.simulate_shot(qr.SimConfig(), 1, 3200.0, shot_seed=4)
        traj = qr.sliced_demod(shot, 62.5e6, 16.0)
        full = qr.full_demod(shot, 62.5e6)
        mean = qr.trajectory_mean(traj)
        assert abs(mean.i - full.i) < 1e-9
        assert abs(mean.q - full.q) < 1e-9

    def test_rejects_non_divisor_slice(self):
        shot = tone_shot(1.0, 0.0, duration_ns=800.0)
        with pytest.raises(ConfigError):
            qr.sliced_demod(shot, 62.5e6, 48.0)  # 48 does not divide 800

    def test_label_carried_through(self):
        shot = tone_shot(1.0, 0.0, label=2)
        traj = qr.sliced_demod(shot, 62.5e6, 16.0)
        assert traj.label == 2


class TestSmooth:
    def test_constant_series_unchanged(self):
        series = np.full(200, 3.25)
        np.testing.assert_allclose(smooth_series(series, 50), series, atol=1e-12)

    def test_window_one_is_identity(self, rng):
        series = rng.normal(size=64)
        np.testing.assert_array_equal(smooth_series(series, 1), series)

    def test_impulse_recovers_kernel(self):
        # direct convolution oracle: an interior impulse must reproduce the
        # normalized kernel, summing to one
        series = np.zeros(200)
        series[100] = 1.0
        out = smooth_series(series, 50)
        kernel = hann_kernel(50)
        lo = 100 - len(kernel) // 2  # even-length kernel centers on tap M//2
        np.testing.assert_allclose(out[lo : lo + len(kernel)], kernel, atol=1e-12)
        assert abs(out.sum() - 1.0) < 1e-12

    def test_sum_preserved_for_interior_support(self, rng):
        series = np.zeros(300)
        series[80:220] = rng.normal(size=140)
        out = smooth_series(series, 51)
        assert abs(out.sum() - series.sum()) < 1e-9

    def test_long_window_clamps_with_warning(self, rng):
        series = rng.normal(size=30)
        with pytest.warns(UserWarning):
            out = smooth_series(series, 50)
        assert len(out) == 30

    def test_smooth_trajectory_both_quadratures(self, rng):
        traj = Trajectory(rng.normal(size=100), rng.normal(size=100), 16.0, label=1)
        out = qr.smooth(traj, 10)
        assert len(out) == 100 and out.label == 1
        assert not np.array_equal(out.i_series, traj.i_series)


class TestFlatten:
    def test_definitional_order(self):
        traj = Trajectory(np.array([1.0, 2.0]), np.array([3.0, 4.0]), 16.0, label=1)
        fv = qr.flatten(traj)
        np.testing.assert_array_equal(fv.values, [1.0, 2.0, 3.0, 4.0])
        assert fv.label == 1

    @pytest.mark.parametrize("c,expected_d", [(150, 300), (500, 1000)])
    def test_dimension_doubles(self, c, expected_d, rng):
        traj = Trajectory(rng.normal(size=c), rng.normal(size=c), 16.0)
        assert len(qr.flatten(traj).values) == expected_d

    def test_unflatten_is_inverse(self, rng):
        traj = Trajectory(rng.normal(size=7), rng.normal(size=7), 16.0, label=2)
        back = qr.unflatten(qr.flatten(traj), dt_ns=16.0)
        np.testing.assert_array_equal(back.i_series, traj.i_series)
        np.testing.assert_array_equal(back.q_series, traj.q_series)
        assert back.label == traj.label


class TestScaler:
    def test_endpoints_map_to_unit_interval(self):
        train = [FeatureVector(np.array([0.0, 10.0])), FeatureVector(np.array([4.0, 20.0]))]
        scaler = qr.fit_scaler(train)
        np.testing.assert_allclose(qr.apply_scaler(scaler, train[0]).values, [0.0, 0.0])
        np.testing.assert_allclose(qr.apply_scaler(scaler, train[1]).values, [1.0, 1.0])

    def test_constant_dimension_maps_to_half(self):
        train = [FeatureVector(np.array([2.0, 1.0])), FeatureVector(np.array([2.0, 3.0]))]
        scaler = qr.fit_scaler(train)
        out = qr.apply_scaler(scaler, FeatureVector(np.array([2.0, 2.0])))
        assert out.values[0] == 0.5

    def test_out_of_range_clamps(self):
        train = [FeatureVector(np.array([0.0])), FeatureVector(np.array([4.0]))]
        scaler = qr.fit_scaler(train)
        assert qr.apply_scaler(scaler, FeatureVector(np.array([-3.0]))).values[0] == 0.0
        assert qr.apply_scaler(scaler, FeatureVector(np.array([9.0]))).values[0] == 1.0

    def test_matrix_interface_matches(self, rng):
        matrix = rng.normal(size=(20, 5))
        scaler = qr.fit_scaler(matrix)
        assert scaler.transform(matrix).min() == 0.0
        assert scaler.transform(matrix).max() == 1.0

    def test_empty_training_set_rejected(self):
        with pytest.raises(ConfigError):
            qr.fit_scaler(np.empty((0, 3)))


def test_feature_matrix_helper(rng):
    fvs = [FeatureVector(rng.normal(size=4)) for _ in range(3)]
    assert as_feature_matrix(fvs).shape == (3, 4)
    assert as_feature_matrix(np.zeros((2, 4))).shape == (2, 4)
