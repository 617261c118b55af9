"""Run configuration: every physical and algorithmic parameter of a scenario.

A ``SystemConfig`` is the single source of truth for one run.  Angles are
stored in radians and all gains/powers in linear units; the flat key=value
config files accepted by the CLI use degrees, dB and dBm and are converted
exactly once at load time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .errors import ConfigError, InvalidArgumentError


def db2lin(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def dbm2watt(x_dbm: float) -> float:
    return 10.0 ** ((x_dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class SolveOptions:
    """Penalty schedule and iteration limits for the iterative solvers."""

    penalty_init: float = 1e-4     # initial rank-one penalty weight
    penalty_scale: float = 10.0    # multiplicative penalty growth, > 1
    gap_tol: float = 1e-4          # stop once nuclear-minus-spectral gap falls below this
    inner_tol: float = 1e-4        # relative objective change that ends an inner pass
    max_inner: int = 30
    max_outer: int = 8
    max_ao: int = 15               # alternating rounds for the sensing-robust solver
    multiplier_init: float = 1.0   # fallback S-procedure multiplier

    def __post_init__(self):
        if self.penalty_init <= 0 or self.gap_tol <= 0 or self.inner_tol <= 0:
            raise InvalidArgumentError("penalty_init, gap_tol and inner_tol must be positive")
        if self.penalty_scale <= 1:
            raise InvalidArgumentError("penalty_scale must exceed 1")
        if min(self.max_inner, self.max_outer, self.max_ao) < 1:
            raise InvalidArgumentError("iteration limits must be at least 1")
        if self.multiplier_init < 0:
            raise InvalidArgumentError("multiplier_init must be non-negative")


@dataclass(frozen=True)
class SystemConfig:
    carrier_wavelength: float = 0.06   # m
    element_spacing: float = 0.03      # m
    n_tx: int = 10
    n_rx: int = 12
    ris_rows: int = 5
    ris_cols: int = 5
    rician_factor: float = 10.0
    # reference path gains (linear) and path-loss exponents per link
    beta_r: float = 1e-3
    beta_b: float = 1e-3
    beta_c: float = 1e-3
    beta_w: float = 1e-2
    alpha_r: float = 2.4
    alpha_b: float = 2.4
    alpha_c: float = 2.4
    alpha_w: float = 2.0
    d_ar: float = 50.0                 # m
    d_rb: float = 5.0
    d_rc: float = 8.0
    d_aw: float = 5.0
    theta_r: float = math.radians(3.0)   # departure angle toward the surface
    theta_w: float = 0.0                 # (estimated) warden angle
    gamma_b: float = 0.0
    gamma_c: float = 0.0
    phi_b: float = math.radians(60.0)
    phi_c: float = math.radians(150.0)
    gamma_a: float = 0.0               # surface-side arrival angles, boresight by default
    phi_a: float = 0.0
    noise_b: float = 1e-10             # W  (-70 dBm)
    noise_c: float = 1e-10
    noise_a: float = 1e-10
    noise_w: float = 1e-10
    power: float = 1.0                 # W  (30 dBm)
    qos_rate: float = 1.0              # bits/s/Hz
    epsilon: float = 0.1
    channel_uses: int = 30
    crb_cap: float = 4e-6              # rad^2
    rng_seed: int = 0
    solver: SolveOptions = field(default_factory=SolveOptions)

    def __post_init__(self):
        positive = {
            "carrier_wavelength": self.carrier_wavelength,
            "element_spacing": self.element_spacing,
            "beta_r": self.beta_r, "beta_b": self.beta_b,
            "beta_c": self.beta_c, "beta_w": self.beta_w,
            "d_ar": self.d_ar, "d_rb": self.d_rb, "d_rc": self.d_rc, "d_aw": self.d_aw,
            "noise_b": self.noise_b, "noise_c": self.noise_c,
            "noise_a": self.noise_a, "noise_w": self.noise_w,
            "power": self.power, "crb_cap": self.crb_cap,
        }
        for name, value in positive.items():
            if not value > 0:
                raise InvalidArgumentError(f"{name} must be strictly positive, got {value}")
        if self.n_tx < 1 or self.n_rx < 1 or self.ris_rows < 1 or self.ris_cols < 1:
            raise InvalidArgumentError("antenna and surface element counts must be at least 1")
        if not 0.0 <= self.epsilon <= 1.0:
            raise InvalidArgumentError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        if self.channel_uses < 1:
            raise InvalidArgumentError("channel_uses must be at least 1")
        if self.qos_rate < 0:
            raise InvalidArgumentError("qos_rate must be non-negative")
        if self.rician_factor < 0:
            raise InvalidArgumentError("rician_factor must be non-negative")

    @property
    def n_ris(self) -> int:
        return self.ris_rows * self.ris_cols


# Table-scale defaults are what SystemConfig() gives.  The desk profile keeps
# the carrier, path-loss law, noise and power of the full-scale setup but
# shrinks the arrays; the link distances shrink proportionally so that the
# operating SINR region (QoS up to ~3 bits/s/Hz at 30 dBm) is preserved
# despite the lost array gain.
DESK_PROFILE = {
    "n_tx": 4,
    "n_rx": 6,
    "ris_rows": 2,
    "ris_cols": 2,
    "d_ar": 10.0,
    "d_rb": 2.5,
    "d_rc": 4.0,
}


def apply_profile(cfg: SystemConfig, profile: str) -> SystemConfig:
    if profile == "paper":
        return cfg
    if profile == "desk":
        return replace(cfg, **DESK_PROFILE)
    raise ConfigError(f"unknown profile '{profile}' (expected desk or paper)")


def desk_config(**overrides) -> SystemConfig:
    """Desk-scale config used throughout the test suite."""
    return replace(apply_profile(SystemConfig(), "desk"), **overrides)


# config-file key -> (SystemConfig field, conversion)
_KEY_MAP = {
    "wavelength_m": ("carrier_wavelength", float),
    "spacing_m": ("element_spacing", float),
    "n_tx": ("n_tx", int),
    "n_rx": ("n_rx", int),
    "ris_rows": ("ris_rows", int),
    "ris_cols": ("ris_cols", int),
    "rician_factor": ("rician_factor", float),
    "beta_r_db": ("beta_r", db2lin),
    "beta_b_db": ("beta_b", db2lin),
    "beta_c_db": ("beta_c", db2lin),
    "beta_w_db": ("beta_w", db2lin),
    "alpha_r": ("alpha_r", float),
    "alpha_b": ("alpha_b", float),
    "alpha_c": ("alpha_c", float),
    "alpha_w": ("alpha_w", float),
    "d_ar_m": ("d_ar", float),
    "d_rb_m": ("d_rb", float),
    "d_rc_m": ("d_rc", float),
    "d_aw_m": ("d_aw", float),
    "theta_r_deg": ("theta_r", math.radians),
    "theta_w_deg": ("theta_w", math.radians),
    "gamma_b_deg": ("gamma_b", math.radians),
    "gamma_c_deg": ("gamma_c", math.radians),
    "phi_b_deg": ("phi_b", math.radians),
    "phi_c_deg": ("phi_c", math.radians),
    "gamma_a_deg": ("gamma_a", math.radians),
    "phi_a_deg": ("phi_a", math.radians),
    "noise_b_dbm": ("noise_b", dbm2watt),
    "noise_c_dbm": ("noise_c", dbm2watt),
    "noise_a_dbm": ("noise_a", dbm2watt),
    "noise_w_dbm": ("noise_w", dbm2watt),
    "power_dbm": ("power", dbm2watt),
    "qos_rate_bpshz": ("qos_rate", float),
    "epsilon": ("epsilon", float),
    "channel_uses": ("channel_uses", int),
    "crb_cap_rad2": ("crb_cap", float),
    "rng_seed": ("rng_seed", int),
}

_SOLVER_KEYS = {
    "penalty_init": float,
    "penalty_scale": float,
    "gap_tol": float,
    "inner_tol": float,
    "max_inner": int,
    "max_outer": int,
    "max_ao": int,
    "multiplier_init": float,
}


def load_config(path: str) -> SystemConfig:
    """Parse a flat key=value config file; unspecified keys take the defaults.

    Values use field units: dB for reference gains, dBm for powers, degrees
    for angles.  Unknown keys and out-of-range values raise ``ConfigError``
    with the offending line or key named.
    """
    overrides: dict = {}
    solver_overrides: dict = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got '{line}'")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key in _KEY_MAP:
                fieldname, conv = _KEY_MAP[key]
                try:
                    overrides[fieldname] = conv(_parse_number(value, key, path, lineno))
                except (TypeError, ValueError) as exc:
                    raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
            elif key in _SOLVER_KEYS:
                conv = _SOLVER_KEYS[key]
                solver_overrides[key] = conv(_parse_number(value, key, path, lineno))
            else:
                raise ConfigError(f"{path}:{lineno}: unknown key '{key}'")
    if solver_overrides:
        overrides["solver"] = replace(SolveOptions(), **solver_overrides)
    try:
        return replace(SystemConfig(), **overrides)
    except InvalidArgumentError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _parse_number(value: str, key: str, path: str, lineno: int) -> float:
    try:
        return float(value)
    except ValueError as exc:
        raise ConfigError(f"{path}:{lineno}: value of {key} is not numeric: '{value}'") from exc
