import cvxpy as cp
import numpy as np
import pytest

from covert_ris.config import desk_config
from covert_ris.convex_kit import (ConicProgram, dominant_eigvec, f_lb, f_ub,
                                   linearize_spectral, rank_one_gap,
                                   robust_covert_matrix, schur_sensing_lmi,
                                   sensing_lmi_matrix, solve_conic)
from covert_ris.covertness import covert_ratio_limit
from covert_ris.errors import InvalidArgumentError
from covert_ris.sensing import crb, make_sensing_model
from conftest import random_psd


class TestTraceBounds:
    def test_tight_at_expansion_point(self, rng):
        for _ in range(20):
            a0, b0 = random_psd(rng, 4), random_psd(rng, 4)
            exact = float(np.real(np.trace(a0 @ b0)))
            assert f_lb(a0, b0, a0, b0) == pytest.approx(exact, rel=1e-9, abs=1e-9)
            assert f_ub(a0, b0, a0, b0) == pytest.approx(exact, rel=1e-9, abs=1e-9)

    def test_identity_point(self):
        eye = np.eye(2, dtype=complex)
        assert f_lb(eye, eye, eye, eye) == pytest.approx(2.0)

    def test_zero_upper(self):
        z = np.zeros((3, 3), dtype=complex)
        assert f_ub(z, z, z, z) == 0.0

    def test_sandwich_random(self, rng):
        worst = -np.inf
        for _ in range(2000):
            n = int(rng.integers(2, 9))
            a, b = random_psd(rng, n), random_psd(rng, n)
            a0, b0 = random_psd(rng, n), random_psd(rng, n)
            exact = float(np.real(np.trace(a @ b)))
            worst = max(worst, f_lb(a, b, a0, b0) - exact, exact - f_ub(a, b, a0, b0))
        assert worst <= 1e-9

    def test_dimension_mismatch(self, rng):
        with pytest.raises(InvalidArgumentError):
            f_lb(random_psd(rng, 3), random_psd(rng, 3),
                 random_psd(rng, 3), random_psd(rng, 4))


class TestRankOnePieces:
    def test_rank_one_gap_zero(self, rng):
        v = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        assert rank_one_gap(np.outer(v, v.conj())) == pytest.approx(0.0, abs=1e-10)

    def test_identity_gap(self):
        assert rank_one_gap(np.eye(2, dtype=complex)) == pytest.approx(1.0)

    def test_gap_matches_eigensum(self, rng):
        x = random_psd(rng, 6, rank=2)
        eigs = np.linalg.eigvalsh(x)
        assert rank_one_gap(x) == pytest.approx(np.sum(eigs) - eigs[-1], rel=1e-12)

    def test_linearization_tight_at_point(self, rng):
        v = random_psd(rng, 5)
        assert linearize_spectral(v, v) == pytest.approx(np.linalg.eigvalsh(v)[-1],
                                                         rel=1e-12)

    def test_linearization_affine(self, rng):
        v0 = random_psd(rng, 4)
        delta = random_psd(rng, 4)
        _, u = dominant_eigvec(v0)[1], dominant_eigvec(v0)[1]
        base = linearize_spectral(v0, v0)
        moved = linearize_spectral(v0 + delta, v0)
        expect = float(np.real(u.conj() @ delta @ u))
        assert moved - base == pytest.approx(expect, rel=1e-9, abs=1e-12)

    def test_subgradient_inequality(self, rng):
        for _ in range(300):
            v = random_psd(rng, 4)
            v0 = random_psd(rng, 4)
            spectral = np.linalg.eigvalsh(v)[-1]
            assert spectral >= linearize_spectral(v, v0) - 1e-10


class TestSolveConic:
    def test_bounded_trace(self):
        prog = ConicProgram()
        x = prog.hermitian("X", 3)
        prog.add(x >> 0, cp.real(cp.trace(x)) <= 1.0)
        prog.maximize(cp.real(cp.trace(x)))
        res = solve_conic(prog)
        assert res.status == "optimal"
        assert res.objective == pytest.approx(1.0, abs=1e-6)

    def test_infeasible_toy(self):
        prog = ConicProgram()
        x = prog.hermitian("X", 2)
        prog.add(x >> 0, cp.real(cp.trace(x)) <= -1.0)
        prog.maximize(cp.real(cp.trace(x)))
        assert solve_conic(prog).status == "infeasible"

    def test_unit_trace_eigenvalue_optimum(self, rng):
        c = random_psd(rng, 2)
        prog = ConicProgram()
        x = prog.hermitian("X", 2)
        prog.add(x >> 0, cp.real(cp.trace(x)) == 1.0)
        prog.maximize(cp.real(cp.trace(c @ x)))
        res = solve_conic(prog)
        assert res.objective == pytest.approx(np.linalg.eigvalsh(c)[-1], rel=1e-6)

    def test_duplicate_variable_rejected(self):
        prog = ConicProgram()
        prog.hermitian("X", 2)
        with pytest.raises(InvalidArgumentError):
            prog.hermitian("X", 3)

    def test_values_returned(self, rng):
        prog = ConicProgram()
        x = prog.hermitian("X", 2)
        prog.add(x >> 0, cp.diag(x) == 1)
        prog.maximize(cp.real(x[0, 1] + x[1, 0]))
        res = solve_conic(prog)
        assert res.values["X"].shape == (2, 2)
        assert res.max_violation <= 1e-6


class TestSensingLmi:
    def test_identity_covariance_feasibility_matches_eigen(self):
        cfg = desk_config()
        model = make_sensing_model(cfg)
        w = cfg.power * np.eye(cfg.n_tx, dtype=complex) / cfg.n_tx
        mat = sensing_lmi_matrix(model, w, 0.0)
        assert np.linalg.eigvalsh(mat)[0] >= -1e-12

    def test_exactly_hermitian(self):
        cfg = desk_config()
        model = make_sensing_model(cfg)
        w = np.eye(cfg.n_tx, dtype=complex)
        mat = sensing_lmi_matrix(model, w, 1.0)
        assert np.max(np.abs(mat - mat.conj().T)) == 0.0

    def test_overclaimed_t_infeasible(self):
        cfg = desk_config()
        model = make_sensing_model(cfg)
        prog = ConicProgram()
        w = prog.hermitian("W", cfg.n_tx)
        t = prog.scalar("t")
        prog.add(w >> 0, cp.real(cp.trace(w)) <= cfg.power)
        a_dot = model.resp_dot
        fisher_cap = cfg.power * float(np.real(np.trace(a_dot.conj().T @ a_dot)))
        prog.add(t >= 2.0 * fisher_cap)  # beyond any covariance's reach
        prog.add(schur_sensing_lmi(model, w, t))
        prog.maximize(t)
        assert solve_conic(prog).status == "infeasible"

    def test_feasible_pairs_respect_variance_cap(self, rng):
        # solve for a covariance supporting the floor auxiliary, then recheck
        # with the independent estimation-bound code path
        cfg = desk_config()
        model = make_sensing_model(cfg)
        prog = ConicProgram()
        w = prog.hermitian("W", cfg.n_tx)
        t = prog.scalar("t")
        prog.add(w >> 0, cp.real(cp.trace(w)) <= cfg.power)
        prog.add(t >= model.t_floor)
        prog.add(schur_sensing_lmi(model, w, t))
        prog.maximize(t)
        res = solve_conic(prog)
        assert res.status == "optimal"
        w_val = res.values["W"]
        t_val = float(res.values["t"])
        bound = model.sigma_a2 / (2 * abs(model.alpha_echo) ** 2 * model.snapshots * t_val)
        achieved = crb(model, w_val)
        assert achieved <= bound * (1 + 1e-6)
        assert bound <= model.gamma_crb * (1 + 1e-6)


class TestRobustCovertMatrix:
    def _args(self):
        cfg = desk_config()
        model = make_sensing_model(cfg)
        cap = covert_ratio_limit(cfg.epsilon, cfg.channel_uses)
        return cfg, model, cap

    def test_silent_user_feasible_at_zero(self, rng):
        cfg, model, cap = self._args()
        wc = random_psd(rng, cfg.n_tx)
        mat = robust_covert_matrix(model, np.zeros((4, 4)), wc, 0.0, model.t_floor,
                                   cap, cfg.noise_w, cfg.beta_w, cfg.d_aw, cfg.alpha_w)
        assert np.linalg.eigvalsh(mat)[0] >= -1e-12

    def test_exactly_hermitian(self, rng):
        cfg, model, cap = self._args()
        mat = robust_covert_matrix(model, random_psd(rng, 4), random_psd(rng, 4),
                                   0.3, 5.0, cap, cfg.noise_w, cfg.beta_w,
                                   cfg.d_aw, cfg.alpha_w)
        assert np.max(np.abs(mat - mat.conj().T)) == 0.0

    def test_unit_cap_blocks_covert_power(self, rng):
        # with the ratio cap at one, any covert leakage toward the estimated
        # angle makes the certificate infeasible for every multiplier
        cfg, model, _ = self._args()
        a = model.resp[0].conj()
        wb = 0.01 * np.outer(a, a.conj()) / np.linalg.norm(a) ** 2
        wc = random_psd(rng, cfg.n_tx)
        for z in 10.0 ** np.arange(-9, 3.0):
            mat = robust_covert_matrix(model, wb, wc, z, model.t_floor, 1.0,
                                       cfg.noise_w, cfg.beta_w, cfg.d_aw, cfg.alpha_w)
            assert np.linalg.eigvalsh(mat)[0] < 0
