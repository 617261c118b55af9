import numpy as np
import pytest
from scipy.optimize import brentq

from covert_ris.covertness import (covert_ratio, covert_ratio_floor, covert_ratio_limit,
                                   detection_error_prob, kl_divergence,
                                   make_covertness_spec, pinsker_floor, willie_powers)
from covert_ris.errors import InvalidArgumentError
from covert_ris.oracle import detection_error_prob_mc


def bisect_ratio_oracle(epsilon, uses):
    """Independent root finder on (1, 10) for the ratio-cap equation."""
    target = 1 + 2 * epsilon ** 2 / uses
    return brentq(lambda x: np.log(x) + 1 / x - target, 1 + 1e-14, 10.0, xtol=1e-15)


class TestWilliePowers:
    def test_silent_covert_user(self, rng):
        h = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        outer = np.outer(h, h.conj())
        w_c = np.eye(4, dtype=complex) * 0.1
        lam0, lam1 = willie_powers(outer, np.zeros((4, 4)), w_c, 1e-10)
        assert lam1 == pytest.approx(lam0, rel=1e-15)

    def test_equal_signal_and_noise(self):
        h = np.ones(2, dtype=complex)
        outer = np.outer(h, h.conj())
        sigma = 0.5
        w_b = np.eye(2) * (sigma / 2)  # h^H W_B h = sigma with ||h||^2 = 2
        lam0, lam1 = willie_powers(outer, w_b, np.zeros((2, 2)), sigma)
        assert lam1 / lam0 == pytest.approx(2.0, rel=1e-12)

    def test_rank_one_matches_vector_form(self, rng):
        h = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        w = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        outer = np.outer(h, h.conj())
        lam0, lam1 = willie_powers(outer, np.outer(w, w.conj()), np.zeros((5, 5)), 1.0)
        assert lam1 - lam0 == pytest.approx(np.abs(h.conj() @ w) ** 2, rel=1e-12)

    def test_rejects_indefinite(self, rng):
        h = np.ones(3, dtype=complex)
        bad = np.diag([1.0, -0.5, 0.2]).astype(complex)
        with pytest.raises(InvalidArgumentError):
            willie_powers(np.outer(h, h.conj()), bad, np.zeros((3, 3)), 1.0)

    def test_ordering_always(self, rng):
        for _ in range(50):
            h = rng.standard_normal(3) + 1j * rng.standard_normal(3)
            x = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
            y = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
            lam0, lam1 = willie_powers(np.outer(h, h.conj()),
                                       x @ x.conj().T, y @ y.conj().T, 1e-3)
            assert lam1 >= lam0


class TestKlDivergence:
    def test_zero_iff_equal(self):
        assert kl_divergence(1.3, 1.3) == 0.0
        assert kl_divergence(1.0, 1.5) > 0.0

    def test_e_ratio(self):
        assert kl_divergence(1.0, np.e) == pytest.approx(1.0 / np.e, rel=1e-12)

    def test_asymmetry(self):
        assert kl_divergence(1.0, 2.0) != kl_divergence(2.0, 1.0)

    def test_positive_on_random_grid(self, rng):
        for _ in range(200):
            lam0 = rng.uniform(0.1, 10)
            lam1 = lam0 * rng.uniform(1.001, 5)
            assert kl_divergence(lam0, lam1) > 0

    def test_domain(self):
        with pytest.raises(InvalidArgumentError):
            kl_divergence(0.0, 1.0)


class TestRatioCap:
    def test_zero_level_is_one(self):
        assert covert_ratio_limit(0.0, 30) == 1.0

    def test_against_independent_root(self):
        got = covert_ratio_limit(0.1, 30)
        want = bisect_ratio_oracle(0.1, 30)
        assert got == pytest.approx(want, abs=1e-12)

    def test_residual_on_grid(self):
        for eps in np.linspace(0.01, 0.5, 10):
            for uses in (1, 10, 30, 100, 1000):
                x = covert_ratio_limit(eps, uses)
                residual = abs(np.log(x) + 1 / x - 1 - 2 * eps ** 2 / uses)
                assert residual <= 1e-12

    def test_monotone_in_level(self):
        caps = [covert_ratio_limit(e, 30) for e in (0.05, 0.1, 0.2, 0.4)]
        assert all(b > a for a, b in zip(caps, caps[1:]))

    def test_spec_window(self):
        spec = make_covertness_spec(0.15, 30)
        assert spec.ratio_floor <= 1.0 <= spec.ratio_cap
        for x in (spec.ratio_floor, spec.ratio_cap):
            assert abs(np.log(x) + 1 / x - 1 - 2 * 0.15 ** 2 / 30) <= 1e-12

    def test_floor_at_zero_level(self):
        assert covert_ratio_floor(0.0, 30) == 1.0


class TestDetectionErrorProb:
    def test_indistinguishable(self):
        dep, _ = detection_error_prob(1.0, 1.0, 30)
        assert dep == 1.0

    def test_perfect_detection_limit(self):
        dep, _ = detection_error_prob(1.0, 1e9, 30)
        assert dep < 1e-6

    def test_threshold_formula(self):
        lam0, lam1, uses = 1.0, 1.7, 12
        _, tau = detection_error_prob(lam0, lam1, uses)
        want = uses * np.log(lam1 / lam0) / (1 / lam0 - 1 / lam1)
        assert tau == pytest.approx(want, rel=1e-12)

    def test_pinsker_on_random_grid(self, rng):
        for _ in range(2000):
            lam0 = rng.uniform(0.1, 5.0)
            lam1 = lam0 * np.exp(rng.uniform(1e-4, 1.5))
            uses = int(rng.integers(1, 80))
            dep, _ = detection_error_prob(lam0, lam1, uses)
            assert dep >= pinsker_floor(lam0, lam1, uses)

    def test_monotone_in_active_power(self):
        deps = [detection_error_prob(1.0, l1, 30)[0] for l1 in np.linspace(1.01, 3.0, 40)]
        assert all(b <= a + 1e-12 for a, b in zip(deps, deps[1:]))

    def test_agrees_with_monte_carlo(self):
        for k, (lam0, lam1, uses) in enumerate([(1.0, 1.2, 30), (0.7, 1.1, 15),
                                                (2.0, 2.5, 50)]):
            exact, _ = detection_error_prob(lam0, lam1, uses)
            est, se = detection_error_prob_mc(lam0, lam1, uses, 200_000, seed=11 + k)
            assert abs(est - exact) <= 3 * se

    def test_domain(self):
        with pytest.raises(InvalidArgumentError):
            detection_error_prob(-1.0, 2.0, 30)


class TestCovertRatio:
    def test_silent_user_always_covert(self):
        assert covert_ratio(2.0, 2.0) == 1.0 <= covert_ratio_limit(0.01, 30)

    def test_scale_invariance(self):
        assert covert_ratio(1.0, 1.4) == pytest.approx(covert_ratio(3.0, 4.2), rel=1e-12)
