"""Echo-sensing model for the unknown-warden case.

Response matrices of the monostatic echo, the lower bound on the variance of
any unbiased angle estimate, and the resulting cap on the steering-vector
uncertainty used by the robust covertness constraint.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import steering_ula
from .config import SystemConfig
from .errors import InvalidArgumentError, UnidentifiableAngleError

_FISHER_TOL = 1e-15


def response_matrix(theta: float, n_tx: int, n_rx: int,
                    spacing: float, wavelength: float) -> np.ndarray:
    """Rank-one echo response: outer product of receive and transmit steering vectors."""
    b = steering_ula(theta, n_rx, spacing, wavelength)
    a = steering_ula(theta, n_tx, spacing, wavelength)
    return np.outer(b, a.conj())


def _steering_derivative(theta: float, n: int, spacing: float, wavelength: float) -> np.ndarray:
    a = steering_ula(theta, n, spacing, wavelength)
    return 1j * 2.0 * np.pi * spacing * np.arange(n) * np.cos(theta) / wavelength * a


def response_derivative(theta: float, n_tx: int, n_rx: int,
                        spacing: float, wavelength: float) -> np.ndarray:
    """Angle derivative of the echo response, in closed form."""
    a = steering_ula(theta, n_tx, spacing, wavelength)
    b = steering_ula(theta, n_rx, spacing, wavelength)
    da = _steering_derivative(theta, n_tx, spacing, wavelength)
    db = _steering_derivative(theta, n_rx, spacing, wavelength)
    return np.outer(db, a.conj()) + np.outer(b, da.conj())


def uncertainty_gain(theta_hat: float, n_tx: int, spacing: float, wavelength: float) -> float:
    """Closed-form factor mapping angle variance to the steering error cap:
    (6 pi d cos(theta)/lambda)^2 (n-1) n (2n-1) / 6."""
    if n_tx < 1:
        raise InvalidArgumentError("n_tx must be at least 1")
    c = (6.0 * np.pi * spacing * np.cos(theta_hat) / wavelength) ** 2
    return c * (n_tx - 1) * n_tx * (2 * n_tx - 1) / 6.0


@dataclass(frozen=True)
class SensingModel:
    """Everything the robust solver needs about the echo path."""

    theta_hat: float
    n_tx: int
    n_rx: int
    spacing: float
    wavelength: float
    alpha_echo: float      # echo strength, reference gain over distance^exponent
    sigma_a2: float
    snapshots: int
    gamma_crb: float       # maximum tolerable angle variance, rad^2
    k_gain: float
    resp: np.ndarray       # (n_rx, n_tx)
    resp_dot: np.ndarray

    @property
    def t_floor(self) -> float:
        """Smallest admissible Fisher-ratio auxiliary consistent with the variance cap."""
        return self.sigma_a2 / (2.0 * abs(self.alpha_echo) ** 2 * self.snapshots * self.gamma_crb)


def make_sensing_model(cfg: SystemConfig) -> SensingModel:
    alpha_echo = cfg.beta_w / cfg.d_aw ** cfg.alpha_w
    return SensingModel(
        theta_hat=cfg.theta_w,
        n_tx=cfg.n_tx,
        n_rx=cfg.n_rx,
        spacing=cfg.element_spacing,
        wavelength=cfg.carrier_wavelength,
        alpha_echo=alpha_echo,
        sigma_a2=cfg.noise_a,
        snapshots=cfg.channel_uses,
        gamma_crb=cfg.crb_cap,
        k_gain=uncertainty_gain(cfg.theta_w, cfg.n_tx, cfg.element_spacing, cfg.carrier_wavelength),
        resp=response_matrix(cfg.theta_w, cfg.n_tx, cfg.n_rx,
                             cfg.element_spacing, cfg.carrier_wavelength),
        resp_dot=response_derivative(cfg.theta_w, cfg.n_tx, cfg.n_rx,
                                     cfg.element_spacing, cfg.carrier_wavelength),
    )


def fisher_traces(model: SensingModel, w_cov: np.ndarray) -> tuple[float, complex, float]:
    """The three trace functionals of the transmit covariance that enter the bound."""
    a, ad = model.resp, model.resp_dot
    t_dd = float(np.real(np.trace(ad.conj().T @ ad @ w_cov)))
    t_da = complex(np.trace(ad.conj().T @ a @ w_cov))
    t_aa = float(np.real(np.trace(a.conj().T @ a @ w_cov)))
    return t_dd, t_da, t_aa


def crb(model: SensingModel, w_cov: np.ndarray) -> float:
    """Variance floor of any unbiased angle estimate for transmit covariance w_cov."""
    t_dd, t_da, t_aa = fisher_traces(model, w_cov)
    if t_aa <= 0:
        raise UnidentifiableAngleError("echo carries no power for this covariance")
    fisher = t_dd * t_aa - abs(t_da) ** 2
    if fisher <= _FISHER_TOL * max(t_dd * t_aa, 1e-300):
        raise UnidentifiableAngleError("degenerate Fisher information; angle not identifiable")
    return model.sigma_a2 * t_aa / (2.0 * abs(model.alpha_echo) ** 2 * model.snapshots * fisher)


def steering_error_sq(theta_hat: float, dtheta: float, n_tx: int,
                      spacing: float, wavelength: float) -> float:
    """Exact squared norm of the steering perturbation for an angle offset."""
    k = np.arange(n_tx)
    phase = 2.0 * np.pi * k * spacing / wavelength * (np.sin(theta_hat + dtheta) - np.sin(theta_hat))
    return float(np.sum(2.0 - 2.0 * np.cos(phase)))


def steering_error_sq_approx(theta_hat: float, dtheta: float, n_tx: int,
                             spacing: float, wavelength: float) -> float:
    """Small-offset quadratic approximation of the steering perturbation norm."""
    k = np.arange(n_tx)
    terms = (2.0 * np.pi * k * spacing / wavelength * np.cos(theta_hat) * dtheta) ** 2
    return float(np.sum(terms))


def uncertainty_bound(model: SensingModel, w_cov: np.ndarray) -> float:
    """Cap on the squared steering error implied by the achieved angle variance.

    With the three-sigma construction this bounds the perturbation norm for
    offsets up to three standard deviations of the estimate.
    """
    return model.k_gain * crb(model, w_cov)
