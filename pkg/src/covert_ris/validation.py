"""The bundled oracle suite behind the ``validate`` CLI command.

Each entry cross-checks an analytic path in the package against its
independent brute-force counterpart and yields an ``OracleReport``.
"""

from __future__ import annotations

import numpy as np

from . import oracle
from .channel import build_channel_set
from .config import desk_config
from .convex_kit import f_lb, f_ub
from .covertness import detection_error_prob, kl_divergence, pinsker_floor
from .optimizer import solve_known_warden, solve_sensing_csi
from .sensing import (crb, make_sensing_model, response_derivative, response_matrix,
                      steering_error_sq)


def _random_psd(rng, n):
    x = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return x @ x.conj().T / n


def check_detector_vs_monte_carlo(seed: int = 0, trials: int = 100_000,
                                  triples: int = 8) -> oracle.OracleReport:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for k in range(triples):
        lam0 = rng.uniform(0.5, 2.0)
        lam1 = lam0 * np.exp(rng.uniform(0.02, 0.4))
        uses = int(rng.integers(10, 50))
        exact, _ = detection_error_prob(lam0, lam1, uses)
        est, se = oracle.detection_error_prob_mc(lam0, lam1, uses, trials,
                                                 seed=seed + 1000 + k)
        worst = max(worst, abs(est - exact) / (3.0 * se))
    return oracle.OracleReport.from_deviation(
        "detector-exact-vs-monte-carlo(3se units)", triples, worst, 1.0, seed)


def check_pinsker(seed: int = 0, samples: int = 10_000) -> oracle.OracleReport:
    rng = np.random.default_rng(seed)
    worst = -np.inf
    for _ in range(samples):
        lam0 = rng.uniform(0.1, 5.0)
        lam1 = lam0 * np.exp(rng.uniform(1e-4, 1.0))
        uses = int(rng.integers(1, 60))
        dep, _ = detection_error_prob(lam0, lam1, uses)
        worst = max(worst, pinsker_floor(lam0, lam1, uses) - dep)
    return oracle.OracleReport.from_deviation(
        "detection-error-above-pinsker-floor", samples, worst, 0.0, seed)


def check_crb_vs_numeric_fim(seed: int = 0, samples: int = 20) -> oracle.OracleReport:
    rng = np.random.default_rng(seed)
    cfg = desk_config()
    worst = 0.0
    for _ in range(samples):
        theta = rng.uniform(-1.2, 1.2)
        model = make_sensing_model(
            desk_config(theta_w=theta))
        w = _random_psd(rng, cfg.n_tx)
        closed = crb(model, w)
        numeric = 1.0 / oracle.fim_numeric(model, w)
        worst = max(worst, abs(closed - numeric) / closed)
    return oracle.OracleReport.from_deviation(
        "crb-vs-numeric-fisher", samples, worst, 0.01, seed)


def check_trace_bound_sandwich(seed: int = 0, samples: int = 10_000) -> oracle.OracleReport:
    rng = np.random.default_rng(seed)
    worst = -np.inf
    for _ in range(samples):
        n = int(rng.integers(2, 9))
        a, b = _random_psd(rng, n), _random_psd(rng, n)
        a0, b0 = _random_psd(rng, n), _random_psd(rng, n)
        exact = float(np.real(np.trace(a @ b)))
        low = f_lb(a, b, a0, b0)
        high = f_ub(a, b, a0, b0)
        worst = max(worst, low - exact, exact - high)
    return oracle.OracleReport.from_deviation(
        "trace-product-bound-sandwich", samples, worst, 1e-9, seed)


def check_response_derivative(seed: int = 0, samples: int = 33) -> oracle.OracleReport:
    cfg = desk_config()
    worst = 0.0
    h = 1e-6
    for theta in np.linspace(np.deg2rad(-80), np.deg2rad(80), samples):
        analytic = response_derivative(theta, cfg.n_tx, cfg.n_rx,
                                       cfg.element_spacing, cfg.carrier_wavelength)
        fd = (response_matrix(theta + h, cfg.n_tx, cfg.n_rx,
                              cfg.element_spacing, cfg.carrier_wavelength)
              - response_matrix(theta - h, cfg.n_tx, cfg.n_rx,
                                cfg.element_spacing, cfg.carrier_wavelength)) / (2 * h)
        worst = max(worst, np.linalg.norm(analytic - fd) / np.linalg.norm(analytic))
    return oracle.OracleReport.from_deviation(
        "response-derivative-vs-finite-difference", samples, worst, 1e-6, seed)


def check_steering_error_identity(seed: int = 0, samples: int = 100) -> oracle.OracleReport:
    rng = np.random.default_rng(seed)
    cfg = desk_config()
    from .channel import steering_ula
    worst = 0.0
    for _ in range(samples):
        th = rng.uniform(-1.0, 1.0)
        # keep the offset away from zero: both sides vanish there and the
        # relative comparison degenerates to roundoff noise
        dth = rng.choice([-1.0, 1.0]) * rng.uniform(0.01, 0.15)
        direct = np.linalg.norm(
            steering_ula(th + dth, cfg.n_tx, cfg.element_spacing, cfg.carrier_wavelength)
            - steering_ula(th, cfg.n_tx, cfg.element_spacing, cfg.carrier_wavelength)) ** 2
        closed = steering_error_sq(th, dth, cfg.n_tx, cfg.element_spacing,
                                   cfg.carrier_wavelength)
        worst = max(worst, abs(direct - closed) / max(direct, 1e-30))
    return oracle.OracleReport.from_deviation(
        "steering-error-closed-form-vs-direct", samples, worst, 1e-12, seed)


def check_small_instance_optimality(seed: int = 0) -> oracle.OracleReport:
    cfg = desk_config(n_tx=3, ris_rows=2, ris_cols=2)
    ch = build_channel_set(cfg, seed)
    sol = solve_known_warden(cfg, ch)
    best = oracle.grid_search_small(cfg, ch)
    if sol.status != "optimal" or best is None:
        return oracle.OracleReport("tiny-instance-vs-grid-search", 1, np.inf, 0.05, False, seed)
    shortfall = max(0.0, (best - sol.covert_rate) / best)
    return oracle.OracleReport.from_deviation(
        "tiny-instance-vs-grid-search", 1, shortfall, 0.05, seed)


def check_robust_covertness(seed: int = 0, samples: int = 1000) -> oracle.OracleReport:
    cfg = desk_config()
    ch = build_channel_set(cfg, seed)
    sol = solve_sensing_csi(cfg, ch)
    if sol.status != "optimal":
        return oracle.OracleReport("sampled-robust-covertness", samples, np.inf, 0.0, False, seed)
    model = make_sensing_model(cfg)
    from .covertness import covert_ratio_limit
    cap = covert_ratio_limit(cfg.epsilon, cfg.channel_uses)
    wb = np.outer(sol.w_b, sol.w_b.conj())
    wc = np.outer(sol.w_c, sol.w_c.conj())
    worst = oracle.robustness_sampler(model, wb, wc, sol.achieved_crb,
                                      cfg.noise_w, model.alpha_echo,
                                      samples=samples, seed=seed)
    return oracle.OracleReport.from_deviation(
        "sampled-robust-covertness(ratio/cap)", samples, worst / cap, 1.0 + 1e-3, seed)


def validate_all(seed: int = 0, quick: bool = False) -> list[oracle.OracleReport]:
    trials = 50_000 if quick else 200_000
    reports = [
        check_pinsker(seed),
        check_detector_vs_monte_carlo(seed, trials=trials),
        check_crb_vs_numeric_fim(seed),
        check_trace_bound_sandwich(seed),
        check_response_derivative(seed),
        check_steering_error_identity(seed),
        check_small_instance_optimality(seed),
        check_robust_covertness(seed),
    ]
    return reports
