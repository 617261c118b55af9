"""Channel synthesis and NOMA SINR arithmetic.

Every generator is a pure, seedable function of the config, so one
``ChannelSet`` can be shared across all schemes at a scenario point and
regenerated bit-for-bit from ``(cfg, seed)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import SystemConfig
from .errors import InvalidArgumentError


def steering_ula(theta: float, n: int, spacing: float, wavelength: float) -> np.ndarray:
    """Uniform linear array steering vector; element k carries phase 2*pi*k*d*sin(theta)/lambda."""
    if n < 1:
        raise InvalidArgumentError(f"element count must be >= 1, got {n}")
    if spacing <= 0 or wavelength <= 0:
        raise InvalidArgumentError("spacing and wavelength must be positive")
    k = np.arange(n)
    return np.exp(1j * 2.0 * np.pi * spacing * k * np.sin(theta) / wavelength)


def steering_upa(gamma: float, phi: float, m1: int, m2: int,
                 spacing: float, wavelength: float) -> np.ndarray:
    """Planar array steering vector: Kronecker product of the row and column factors."""
    if m1 < 1 or m2 < 1:
        raise InvalidArgumentError("planar array dimensions must be >= 1")
    if spacing <= 0 or wavelength <= 0:
        raise InvalidArgumentError("spacing and wavelength must be positive")
    c = 2.0 * np.pi * spacing / wavelength
    a_h = np.exp(1j * c * np.arange(m1) * np.sin(gamma) * np.cos(phi))
    a_v = np.exp(1j * c * np.arange(m2) * np.sin(gamma) * np.sin(phi))
    return np.kron(a_h, a_v)


def gen_channel_ar(cfg: SystemConfig, seed: int) -> np.ndarray:
    """Rician transmitter-to-surface channel (n_ris x n_tx), seeded scattering part.

    The line-of-sight factor is the outer product of the surface receive
    steering vector and the transmit steering vector; the scattered part is
    i.i.d. standard complex Gaussian.  A Rician factor of ``inf`` drops the
    scattered part entirely.
    """
    a_r = steering_upa(cfg.gamma_a, cfg.phi_a, cfg.ris_rows, cfg.ris_cols,
                       cfg.element_spacing, cfg.carrier_wavelength)
    a_t = steering_ula(cfg.theta_r, cfg.n_tx, cfg.element_spacing, cfg.carrier_wavelength)
    los = np.outer(a_r, a_t.conj())
    ell = cfg.rician_factor
    if np.isinf(ell):
        w_los, w_nlos = 1.0, 0.0
    else:
        w_los = np.sqrt(ell / (ell + 1.0))
        w_nlos = np.sqrt(1.0 / (ell + 1.0))
    rng = np.random.default_rng(seed)
    nlos = (rng.standard_normal((cfg.n_ris, cfg.n_tx))
            + 1j * rng.standard_normal((cfg.n_ris, cfg.n_tx))) / np.sqrt(2.0)
    gain = np.sqrt(cfg.beta_r / cfg.d_ar ** cfg.alpha_r)
    return gain * (w_los * los + w_nlos * nlos)


def gen_channel_ru(cfg: SystemConfig, user: str) -> np.ndarray:
    """Deterministic line-of-sight surface-to-user channel for 'bob' or 'carol'."""
    if user == "bob":
        beta, dist, alpha, gamma, phi = cfg.beta_b, cfg.d_rb, cfg.alpha_b, cfg.gamma_b, cfg.phi_b
    elif user == "carol":
        beta, dist, alpha, gamma, phi = cfg.beta_c, cfg.d_rc, cfg.alpha_c, cfg.gamma_c, cfg.phi_c
    else:
        raise InvalidArgumentError(f"user must be 'bob' or 'carol', got '{user}'")
    a = steering_upa(gamma, phi, cfg.ris_rows, cfg.ris_cols,
                     cfg.element_spacing, cfg.carrier_wavelength)
    return np.sqrt(beta / dist ** alpha) * a


def gen_channel_aw(cfg: SystemConfig, theta_w: float) -> np.ndarray:
    """Line-of-sight transmitter-to-warden channel for a given warden angle."""
    a = steering_ula(theta_w, cfg.n_tx, cfg.element_spacing, cfg.carrier_wavelength)
    return np.sqrt(cfg.beta_w / cfg.d_aw ** cfg.alpha_w) * a


def effective_cascades(ch: "ChannelSet") -> tuple[np.ndarray, np.ndarray]:
    """Lifted cascade matrices: diag(conj(h_ru)) times the transmitter-surface channel."""
    h_ar, h_rb, h_rc = ch.h_ar, ch.h_rb, ch.h_rc
    if h_ar.shape[0] != h_rb.shape[0] or h_ar.shape[0] != h_rc.shape[0]:
        raise InvalidArgumentError("surface dimension mismatch between h_ar and the user channels")
    g_b = np.diag(h_rb.conj()) @ h_ar
    g_c = np.diag(h_rc.conj()) @ h_ar
    return g_b, g_c


@dataclass
class ChannelSet:
    """One realization of all links plus the derived cascade matrices."""

    h_ar: np.ndarray           # (n_ris, n_tx)
    h_rb: np.ndarray           # (n_ris,)
    h_rc: np.ndarray           # (n_ris,)
    h_aw: np.ndarray           # (n_tx,)
    seed: int
    g_b: np.ndarray = field(init=False)
    g_c: np.ndarray = field(init=False)

    def __post_init__(self):
        self.g_b, self.g_c = effective_cascades(self)


def build_channel_set(cfg: SystemConfig, seed: int) -> ChannelSet:
    return ChannelSet(
        h_ar=gen_channel_ar(cfg, seed),
        h_rb=gen_channel_ru(cfg, "bob"),
        h_rc=gen_channel_ru(cfg, "carol"),
        h_aw=gen_channel_aw(cfg, cfg.theta_w),
        seed=seed,
    )


def cascade_gain(ch: ChannelSet, which: str, v: np.ndarray, w: np.ndarray) -> float:
    """|v^H G w|^2 for the requested user cascade."""
    g = ch.g_b if which == "bob" else ch.g_c
    return float(np.abs(v.conj() @ g @ w) ** 2)


def sinr_bob(ch: ChannelSet, v: np.ndarray, w_b: np.ndarray, sigma_b2: float) -> float:
    """Covert user's SINR after interference cancellation."""
    return cascade_gain(ch, "bob", v, w_b) / sigma_b2


def sinr_carol(ch: ChannelSet, v: np.ndarray, w_b: np.ndarray, w_c: np.ndarray,
               sigma_b2: float, sigma_c2: float) -> float:
    """Public user's achievable SINR: the worse of the two decoding branches.

    The public signal must be decodable both at the covert user (for
    cancellation) and at the public user itself.
    """
    num_b = cascade_gain(ch, "bob", v, w_c)
    den_b = cascade_gain(ch, "bob", v, w_b) + sigma_b2
    num_c = cascade_gain(ch, "carol", v, w_c)
    den_c = cascade_gain(ch, "carol", v, w_b) + sigma_c2
    return min(num_b / den_b, num_c / den_c)
