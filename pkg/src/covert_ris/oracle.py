"""Independent brute-force validators.

Every check here reaches its answer by a different route than the code it
validates: the detector is simulated from raw samples instead of gamma tails,
the estimation bound comes from a finite-differenced full-parameter Fisher
matrix instead of the closed form, the beamforming optimum from exhaustive
quantized search instead of conic solves, and robust covertness from exact
channel sweeps instead of the matrix certificate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelSet, steering_ula
from .config import SystemConfig
from .covertness import covert_ratio_limit
from .errors import InvalidArgumentError, UnidentifiableAngleError
from .sensing import SensingModel


@dataclass(frozen=True)
class OracleReport:
    name: str
    samples: int
    max_deviation: float
    tolerance: float
    passed: bool
    seed: int

    @staticmethod
    def from_deviation(name: str, samples: int, deviation: float,
                       tolerance: float, seed: int) -> "OracleReport":
        return OracleReport(name, samples, float(deviation), float(tolerance),
                            bool(deviation <= tolerance), seed)


def detection_error_prob_mc(lam0: float, lam1: float, channel_uses: int,
                            trials: int, seed: int = 0) -> tuple[float, float]:
    """Monte-Carlo detection error of the block likelihood-ratio rule.

    Draws the L complex-Gaussian samples per trial under each hypothesis and
    applies the product likelihood-ratio decision directly (no reduction to
    an energy statistic).  Returns the error estimate and its standard error.
    """
    if trials < 10_000:
        raise InvalidArgumentError("need at least 1e4 trials for a meaningful estimate")
    rng = np.random.default_rng(seed)
    log_ratio_const = channel_uses * np.log(lam1 / lam0)
    coeff = 1.0 / lam1 - 1.0 / lam0  # negative for lam1 > lam0

    def decide_active(scale: float, n: int) -> int:
        # chunked so the 1e6-trial acceptance runs fit in memory
        hits = 0
        left = n
        while left > 0:
            m = min(left, 200_000)
            y = (rng.standard_normal((m, channel_uses))
                 + 1j * rng.standard_normal((m, channel_uses))) * np.sqrt(scale / 2.0)
            log_lr = log_ratio_const + np.sum(np.abs(y) ** 2, axis=1) * coeff
            hits += int(np.count_nonzero(log_lr < 0.0))
            left -= m
        return hits

    n_fa = decide_active(lam0, trials)
    n_active = decide_active(lam1, trials)
    p_fa = n_fa / trials
    p_md = 1.0 - n_active / trials
    est = p_fa + p_md
    se = np.sqrt(p_fa * (1.0 - p_fa) / trials + p_md * (1.0 - p_md) / trials)
    return float(est), float(se)


def fim_numeric(model: SensingModel, w_cov: np.ndarray, h_step: float = 1e-5) -> float:
    """Effective Fisher information of the echo likelihood in the angle.

    Builds the full parameter Fisher matrix over (angle, complex echo gain)
    with the angle derivative taken by central differences of the response
    matrix, inverts it, and returns the reciprocal of the angle entry of the
    inverse.  Compare its reciprocal against the closed-form variance bound.
    """
    if not 1e-7 <= h_step <= 1e-4:
        raise InvalidArgumentError("h_step must lie in [1e-7, 1e-4]")

    def resp(theta):
        b = steering_ula(theta, model.n_rx, model.spacing, model.wavelength)
        a = steering_ula(theta, model.n_tx, model.spacing, model.wavelength)
        return np.outer(b, a.conj())

    th = model.theta_hat
    alpha = model.alpha_echo
    d_theta = alpha * (resp(th + h_step) - resp(th - h_step)) / (2.0 * h_step)
    d_re = resp(th)
    d_im = 1j * resp(th)
    derivs = [d_theta, d_re, d_im]
    fim = np.zeros((3, 3))
    for i in range(3):
        for j in range(3):
            fim[i, j] = (2.0 * model.snapshots / model.sigma_a2) * float(
                np.real(np.trace(derivs[i].conj().T @ derivs[j] @ w_cov)))
    try:
        inv = np.linalg.inv(fim)
    except np.linalg.LinAlgError as exc:
        raise UnidentifiableAngleError("numeric Fisher matrix is singular") from exc
    var = inv[0, 0]
    if var <= 0:
        raise UnidentifiableAngleError("numeric Fisher matrix is not positive definite")
    return float(1.0 / var)


def grid_search_small(cfg: SystemConfig, ch: ChannelSet,
                      phase_levels: int = 16, beam_grid: int = 20):
    """Exhaustive small-instance search over quantized phases and beam mixtures.

    Surface phases take ``phase_levels`` values each (first element pinned,
    a global phase is immaterial); the covert beam mixes its matched direction
    with the warden-nulled one, the public beam is matched, and the power
    split runs over a grid.  Returns the best feasible covert rate, or None
    when nothing on the grid is feasible.
    """
    m = cfg.n_ris
    n = cfg.n_tx
    if m > 4 or n > 3 or phase_levels > 16:
        raise InvalidArgumentError("exhaustive search is limited to tiny instances")
    cap = covert_ratio_limit(cfg.epsilon, cfg.channel_uses)
    rho = 2.0 ** cfg.qos_rate - 1.0
    h = ch.h_aw
    u = h / np.linalg.norm(h)

    phases = np.exp(2j * np.pi * np.arange(phase_levels) / phase_levels)
    if m > 1:
        grids = np.meshgrid(*([phases] * (m - 1)), indexing="ij")
        v_all = np.column_stack([np.ones(phase_levels ** (m - 1)),
                                 *[g.ravel() for g in grids]])
    else:
        v_all = np.ones((1, 1), dtype=complex)

    mix = np.linspace(0.0, 1.0, beam_grid)
    split = np.linspace(0.0, 1.0, beam_grid)
    best = -np.inf
    for lo in range(0, len(v_all), 512):
        vc = v_all[lo:lo + 512]
        gb = vc.conj() @ ch.g_b                        # (k, n)
        gc = vc.conj() @ ch.g_c
        bob_mrt = gb.conj() / np.linalg.norm(gb, axis=1, keepdims=True)
        proj = bob_mrt @ u.conj()
        bob_null = bob_mrt - proj[:, None] * u[None, :]
        nn = np.linalg.norm(bob_null, axis=1, keepdims=True)
        bob_null = np.where(nn > 1e-12, bob_null / np.maximum(nn, 1e-30), bob_mrt)
        carol_dir = gc.conj() / np.linalg.norm(gc, axis=1, keepdims=True)

        d_mu = (mix[None, :, None] * bob_mrt[:, None, :]
                + (1.0 - mix)[None, :, None] * bob_null[:, None, :])  # (k, mu, n)
        dn = np.linalg.norm(d_mu, axis=2, keepdims=True)
        d_mu = d_mu / np.maximum(dn, 1e-30)
        ok_dir = dn[..., 0] > 1e-12                                  # (k, mu)

        gbd2 = np.abs(np.einsum("kn,kmn->km", gb, d_mu)) ** 2        # (k, mu)
        gcd2 = np.abs(np.einsum("kn,kmn->km", gc, d_mu)) ** 2
        hd2 = np.abs(np.einsum("n,kmn->km", h.conj(), d_mu)) ** 2
        gbc2 = np.abs(np.einsum("kn,kn->k", gb, carol_dir)) ** 2     # (k,)
        gcc2 = np.abs(np.einsum("kn,kn->k", gc, carol_dir)) ** 2
        hc2 = np.abs(carol_dir @ h.conj()) ** 2

        p_b = split[None, None, :] * cfg.power                       # broadcast (1,1,p)
        p_c = (1.0 - split)[None, None, :] * cfg.power
        lam0 = p_c * hc2[:, None, None] + cfg.noise_w
        lam1 = p_b * hd2[:, :, None] + lam0
        feasible = (lam1 / lam0 <= cap * (1.0 + 1e-12)) & ok_dir[:, :, None]
        if rho > 0:
            b1 = p_c * gbc2[:, None, None] / (p_b * gbd2[:, :, None] + cfg.noise_b)
            b2 = p_c * gcc2[:, None, None] / (p_b * gcd2[:, :, None] + cfg.noise_c)
            feasible &= (np.minimum(b1, b2) >= rho)
        rate = np.log2(1.0 + p_b * gbd2[:, :, None] / cfg.noise_b)
        rate = np.where(feasible, rate, -np.inf)
        best = max(best, float(rate.max()))
    return None if best == -np.inf else best


def robustness_sampler(model: SensingModel, wb_mat: np.ndarray, wc_mat: np.ndarray,
                       crb_value: float, sigma_w2: float, alpha_echo: float,
                       samples: int = 1000, seed: int = 0) -> float:
    """Worst covert power ratio over exactly evaluated channels in the
    three-sigma angle interval; the interval endpoints are always included."""
    if samples < 1000:
        raise InvalidArgumentError("need at least 1e3 samples")
    rng = np.random.default_rng(seed)
    radius = 3.0 * np.sqrt(max(crb_value, 0.0))
    offsets = np.concatenate([rng.uniform(-radius, radius, samples),
                              [-radius, 0.0, radius]])
    worst = 0.0
    for dth in offsets:
        a = steering_ula(model.theta_hat + dth, model.n_tx, model.spacing,
                         model.wavelength)
        p_c = alpha_echo * float(np.real(a.conj() @ wc_mat @ a))
        p_b = alpha_echo * float(np.real(a.conj() @ wb_mat @ a))
        lam0 = max(p_c, 0.0) + sigma_w2
        lam1 = max(p_b, 0.0) + lam0
        worst = max(worst, lam1 / lam0)
    return worst
