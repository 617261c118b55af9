"""Detection-side mathematics at the warden.

Hypothesis mean powers, KL divergence between the two received-signal laws,
the admissible power-ratio cap for a covertness level, and the exact minimum
detection error probability of the optimal likelihood-ratio test.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammainc, gammaincc

from .errors import InvalidArgumentError, NumericalDomainError

_PSD_TOL = 1e-9


@dataclass(frozen=True)
class CovertnessSpec:
    """Detection constants for one run: level, block length and the ratio window."""

    epsilon: float
    channel_uses: int
    ratio_cap: float     # root > 1 of ln(x) + 1/x = 1 + 2 eps^2 / L
    ratio_floor: float   # companion root in (0, 1]


def willie_powers(h_outer: np.ndarray, w_b_cov: np.ndarray, w_c_cov: np.ndarray,
                  sigma_w2: float) -> tuple[float, float]:
    """Mean received powers at the warden under the idle and active hypotheses."""
    for name, mat in (("w_b_cov", w_b_cov), ("w_c_cov", w_c_cov)):
        eigs = np.linalg.eigvalsh(mat)
        scale = max(abs(eigs[-1]), 1.0)
        if eigs[0] < -_PSD_TOL * scale:
            raise InvalidArgumentError(f"{name} is not positive semidefinite (min eig {eigs[0]:.3e})")
    p_c = float(np.real(np.trace(h_outer @ w_c_cov)))
    p_b = float(np.real(np.trace(h_outer @ w_b_cov)))
    tol = _PSD_TOL * max(1.0, abs(p_c), abs(p_b))
    if p_c < -tol or p_b < -tol:
        raise NumericalDomainError(f"negative received power beyond tolerance: {p_c:.3e}, {p_b:.3e}")
    lam0 = max(p_c, 0.0) + sigma_w2
    lam1 = max(p_b, 0.0) + max(p_c, 0.0) + sigma_w2
    return lam0, lam1


def kl_divergence(lam0: float, lam1: float) -> float:
    """Relative entropy between the idle and active received-sample laws (nats)."""
    if lam0 <= 0 or lam1 <= 0:
        raise InvalidArgumentError("mean powers must be strictly positive")
    return float(np.log(lam1 / lam0) + lam0 / lam1 - 1.0)


def covert_ratio(lam0: float, lam1: float) -> float:
    """Active-to-idle mean power ratio, the covertness metric used throughout."""
    return lam1 / lam0


def _ratio_equation(x: float) -> float:
    return np.log(x) + 1.0 / x


def covert_ratio_limit(epsilon: float, channel_uses: int) -> float:
    """Largest admissible power ratio for a covertness level: the root above 1
    of ln(x) + 1/x = 1 + 2 eps^2 / L, found by bisection on the increasing branch."""
    if not 0.0 <= epsilon <= 1.0:
        raise InvalidArgumentError(f"epsilon must lie in [0, 1], got {epsilon}")
    if channel_uses < 1:
        raise InvalidArgumentError("channel_uses must be at least 1")
    if epsilon == 0.0:
        return 1.0
    target = 1.0 + 2.0 * epsilon ** 2 / channel_uses
    hi = 2.0
    while _ratio_equation(hi) < target:
        hi *= 2.0
    lo = 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _ratio_equation(mid) < target:
            lo = mid
        else:
            hi = mid
    return hi


def covert_ratio_floor(epsilon: float, channel_uses: int) -> float:
    """Companion root in (0, 1], on the decreasing branch of the same equation."""
    if epsilon == 0.0:
        return 1.0
    target = 1.0 + 2.0 * epsilon ** 2 / channel_uses
    lo = 0.5
    while _ratio_equation(lo) < target:
        lo *= 0.5
    hi = 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _ratio_equation(mid) < target:
            hi = mid
        else:
            lo = mid
    return lo


def make_covertness_spec(epsilon: float, channel_uses: int) -> CovertnessSpec:
    return CovertnessSpec(
        epsilon=epsilon,
        channel_uses=channel_uses,
        ratio_cap=covert_ratio_limit(epsilon, channel_uses),
        ratio_floor=covert_ratio_floor(epsilon, channel_uses),
    )


def detection_error_prob(lam0: float, lam1: float, channel_uses: int) -> tuple[float, float]:
    """Exact minimum detection error probability of the optimal block test.

    The joint likelihood-ratio test over L samples reduces to comparing the
    received energy against tau = L ln(lam1/lam0) / (1/lam0 - 1/lam1); the
    energy is Gamma(L, lam) under either hypothesis, so false alarm and missed
    detection are regularized gamma tails.  Returns (error probability,
    threshold).
    """
    if lam0 <= 0 or lam1 <= 0:
        raise InvalidArgumentError("mean powers must be strictly positive")
    if lam1 < lam0:
        raise InvalidArgumentError("expected lam1 >= lam0")
    if lam1 == lam0:
        return 1.0, float("inf")
    tau = channel_uses * np.log(lam1 / lam0) / (1.0 / lam0 - 1.0 / lam1)
    p_fa = float(gammaincc(channel_uses, tau / lam0))
    p_md = float(gammainc(channel_uses, tau / lam1))
    return p_fa + p_md, float(tau)


def pinsker_floor(lam0: float, lam1: float, channel_uses: int) -> float:
    """Lower bound on the detection error probability from the block KL divergence."""
    kl_block = channel_uses * kl_divergence(lam0, lam1)
    return max(0.0, 1.0 - np.sqrt(kl_block / 2.0))
