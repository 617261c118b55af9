import numpy as np
import pytest

from covert_ris.channel import steering_ula
from covert_ris.config import desk_config
from covert_ris.errors import InvalidArgumentError, UnidentifiableAngleError
from covert_ris.oracle import fim_numeric
from covert_ris.sensing import (crb, make_sensing_model, response_derivative,
                                response_matrix, steering_error_sq,
                                steering_error_sq_approx, uncertainty_bound,
                                uncertainty_gain)
from conftest import random_psd

LAM = 0.06
D = 0.03


class TestResponseMatrix:
    def test_broadside_all_ones(self):
        np.testing.assert_allclose(response_matrix(0.0, 3, 5, D, LAM), np.ones((5, 3)))

    def test_scalar_case(self):
        np.testing.assert_allclose(response_matrix(0.9, 1, 1, D, LAM), [[1.0]])

    def test_frobenius_norm(self):
        a = response_matrix(0.4, 4, 6, D, LAM)
        assert np.linalg.norm(a, "fro") ** 2 == pytest.approx(24.0, rel=1e-12)

    def test_rank_one(self):
        a = response_matrix(-0.6, 4, 6, D, LAM)
        s = np.linalg.svd(a, compute_uv=False)
        assert s[1] < 1e-12 * s[0]


class TestResponseDerivative:
    def test_scalar_case_zero(self):
        np.testing.assert_allclose(response_derivative(0.3, 1, 1, D, LAM), [[0.0]])

    def test_endfire_zero(self):
        d = response_derivative(np.pi / 2, 3, 4, D, LAM)
        assert np.max(np.abs(d)) < 1e-12

    def test_matches_finite_difference_over_grid(self):
        h = 1e-6
        for theta in np.deg2rad(np.linspace(-80, 80, 17)):
            analytic = response_derivative(theta, 4, 6, D, LAM)
            fd = (response_matrix(theta + h, 4, 6, D, LAM)
                  - response_matrix(theta - h, 4, 6, D, LAM)) / (2 * h)
            rel = np.linalg.norm(analytic - fd, "fro") / np.linalg.norm(analytic, "fro")
            assert rel <= 1e-6


class TestCrb:
    def test_halves_with_double_snapshots(self, rng):
        from dataclasses import replace
        cfg = desk_config()
        m1 = make_sensing_model(cfg)
        m2 = make_sensing_model(replace(cfg, channel_uses=2 * cfg.channel_uses))
        w = random_psd(rng, cfg.n_tx)
        assert crb(m2, w) == pytest.approx(0.5 * crb(m1, w), rel=1e-10)

    def test_doubles_with_double_noise(self, rng):
        from dataclasses import replace
        cfg = desk_config()
        m1 = make_sensing_model(cfg)
        m2 = make_sensing_model(replace(cfg, noise_a=2 * cfg.noise_a))
        w = random_psd(rng, cfg.n_tx)
        assert crb(m2, w) == pytest.approx(2.0 * crb(m1, w), rel=1e-10)

    def test_against_numeric_fisher(self, rng):
        worst = 0.0
        for _ in range(20):
            theta = rng.uniform(-1.2, 1.2)
            model = make_sensing_model(desk_config(theta_w=theta))
            w = random_psd(rng, 4)
            closed = crb(model, w)
            numeric = 1.0 / fim_numeric(model, w)
            worst = max(worst, abs(closed - numeric) / closed)
        assert worst <= 0.01

    def test_positive(self, rng):
        model = make_sensing_model(desk_config())
        for _ in range(20):
            assert crb(model, random_psd(rng, 4)) > 0

    def test_degenerate_raises(self):
        model = make_sensing_model(desk_config(n_tx=1))
        # a single transmit antenna cannot resolve the angle derivative term
        with pytest.raises(UnidentifiableAngleError):
            crb(model, np.zeros((1, 1), dtype=complex))


class TestUncertaintyGain:
    def test_single_antenna_zero(self):
        assert uncertainty_gain(0.0, 1, D, LAM) == 0.0

    def test_endfire_zero(self):
        assert uncertainty_gain(np.pi / 2, 8, D, LAM) < 1e-25

    def test_two_antenna_closed_form(self):
        # (6 pi (lam/2) / lam)^2 * (1*2*3)/6 = 9 pi^2
        assert uncertainty_gain(0.0, 2, LAM / 2, LAM) == pytest.approx(9 * np.pi ** 2,
                                                                       rel=1e-12)


class TestSteeringError:
    def test_zero_offset(self):
        assert steering_error_sq(0.3, 0.0, 6, D, LAM) == 0.0
        assert steering_error_sq_approx(0.3, 0.0, 6, D, LAM) == 0.0

    def test_exact_matches_direct_norm(self, rng):
        for _ in range(100):
            th = rng.uniform(-1.0, 1.0)
            dth = rng.choice([-1.0, 1.0]) * rng.uniform(0.01, 0.15)
            direct = np.linalg.norm(steering_ula(th + dth, 5, D, LAM)
                                    - steering_ula(th, 5, D, LAM)) ** 2
            assert steering_error_sq(th, dth, 5, D, LAM) == pytest.approx(
                direct, abs=1e-12, rel=1e-12)

    def test_symmetric_at_broadside(self):
        for dth in (0.01, 0.05, 0.2):
            assert steering_error_sq(0.0, dth, 5, D, LAM) == pytest.approx(
                steering_error_sq(0.0, -dth, 5, D, LAM), rel=1e-12)

    def test_quadratic_scaling_of_approx(self):
        v1 = steering_error_sq_approx(0.2, 0.01, 6, D, LAM)
        v2 = steering_error_sq_approx(0.2, 0.02, 6, D, LAM)
        assert v2 == pytest.approx(4.0 * v1, rel=1e-12)

    def test_three_sigma_substitution_reproduces_bound(self, rng):
        # plugging the three-sigma offset into the quadratic form gives exactly
        # the gain-times-variance cap
        model = make_sensing_model(desk_config())
        w = random_psd(rng, 4)
        variance = crb(model, w)
        bound = uncertainty_bound(model, w)
        sub = steering_error_sq_approx(model.theta_hat, 3 * np.sqrt(variance),
                                       model.n_tx, D, LAM)
        assert sub == pytest.approx(bound, rel=1e-12)
        assert bound == pytest.approx(model.k_gain * variance, rel=1e-15)

    def test_bound_zero_when_gain_zero(self, rng):
        model = make_sensing_model(desk_config(n_tx=1))
        assert model.k_gain == 0.0

    def test_bound_linear_in_variance(self, rng):
        from dataclasses import replace
        cfg = desk_config()
        m1 = make_sensing_model(cfg)
        m2 = make_sensing_model(replace(cfg, noise_a=2 * cfg.noise_a))
        w = random_psd(rng, 4)
        assert uncertainty_bound(m2, w) == pytest.approx(2 * uncertainty_bound(m1, w),
                                                         rel=1e-10)


class TestFimNumericOracle:
    def test_step_domain(self, rng):
        model = make_sensing_model(desk_config())
        with pytest.raises(InvalidArgumentError):
            fim_numeric(model, random_psd(rng, 4), h_step=1e-2)

    def test_linear_in_snapshots(self, rng):
        from dataclasses import replace
        cfg = desk_config()
        w = random_psd(rng, 4)
        f1 = fim_numeric(make_sensing_model(cfg), w)
        f2 = fim_numeric(make_sensing_model(replace(cfg, channel_uses=60)), w)
        assert f2 == pytest.approx(2 * f1, rel=1e-9)

    def test_vanishes_with_covariance(self, rng):
        model = make_sensing_model(desk_config())
        w = random_psd(rng, 4)
        assert fim_numeric(model, 1e-6 * w) == pytest.approx(1e-6 * fim_numeric(model, w),
                                                             rel=1e-9)

    def test_degenerate_flagged(self):
        model = make_sensing_model(desk_config())
        with pytest.raises(UnidentifiableAngleError):
            fim_numeric(model, np.zeros((4, 4), dtype=complex))
