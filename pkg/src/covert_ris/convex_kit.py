"""Reusable convex building blocks and a thin conic-program wrapper.

The difference-of-convex trace bounds, the rank-one penalty pieces, and the
two linear matrix inequalities (sensing accuracy via a Schur complement,
robust covertness via the S-procedure).  Programs are modeled with cvxpy;
the interface speaks complex Hermitian matrices and the real embedding is
the backend's concern.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import cvxpy as cp
import numpy as np

from .channel import steering_ula
from .errors import InvalidArgumentError
from .sensing import SensingModel

log = logging.getLogger(__name__)

_EIG_DEGENERATE = 1e-10


def _check_same_shape(*mats):
    shape = mats[0].shape
    for m in mats[1:]:
        if m.shape != shape:
            raise InvalidArgumentError(f"shape mismatch: {m.shape} vs {shape}")


def f_lb(a, b, a0: np.ndarray, b0: np.ndarray):
    """Concave global lower bound on Tr(AB) for Hermitian PSD A, B, tight at (a0, b0).

    Works on numpy arrays (returns a float) or cvxpy expressions (returns a
    concave scalar expression affine plus negated squared norms).
    """
    _check_same_shape(a0, b0)
    s0 = a0 + b0
    const = -0.5 * float(np.linalg.norm(s0, "fro") ** 2)
    if isinstance(a, np.ndarray) and isinstance(b, np.ndarray):
        lin = float(np.real(np.trace(s0 @ (a + b))))
        return const + lin - 0.5 * np.linalg.norm(a, "fro") ** 2 - 0.5 * np.linalg.norm(b, "fro") ** 2
    lin = cp.real(cp.trace(s0 @ (a + b)))
    return const + lin - 0.5 * cp.sum_squares(a) - 0.5 * cp.sum_squares(b)


def f_ub(a, b, a0: np.ndarray, b0: np.ndarray):
    """Convex global upper bound on Tr(AB), tight at (a0, b0)."""
    _check_same_shape(a0, b0)
    const = 0.5 * float(np.linalg.norm(a0, "fro") ** 2 + np.linalg.norm(b0, "fro") ** 2)
    if isinstance(a, np.ndarray) and isinstance(b, np.ndarray):
        return (0.5 * np.linalg.norm(a + b, "fro") ** 2 + const
                - float(np.real(np.trace(a0 @ a))) - float(np.real(np.trace(b0 @ b))))
    return (0.5 * cp.sum_squares(a + b) + const
            - cp.real(cp.trace(a0 @ a)) - cp.real(cp.trace(b0 @ b)))


def rank_one_gap(v_mat: np.ndarray) -> float:
    """Nuclear norm minus spectral norm; zero exactly when rank <= 1."""
    eigs = np.linalg.eigvalsh(v_mat)
    return float(np.sum(eigs) - eigs[-1])


def dominant_eigvec(v_mat: np.ndarray) -> tuple[float, np.ndarray]:
    """Largest eigenvalue and its eigenvector; on a near-tie the larger index wins
    deterministically (eigh orders ascending)."""
    eigs, vecs = np.linalg.eigh(v_mat)
    return float(eigs[-1]), vecs[:, -1]


def linearize_spectral(v, v_n: np.ndarray):
    """Affine under-estimator of the spectral norm around v_n (subgradient form)."""
    top, u = dominant_eigvec(v_n)
    outer = np.outer(u, u.conj())
    if isinstance(v, np.ndarray):
        return top + float(np.real(np.trace(outer @ (v - v_n))))
    return top + cp.real(cp.trace(outer @ (v - v_n)))


def _hermitian_psd(expr) -> cp.Constraint:
    # symmetrize so cvxpy can certify hermitianness; exact for mathematically
    # Hermitian expressions
    return (expr + expr.H) / 2 >> 0


def schur_sensing_lmi(model: SensingModel, w_cov, t) -> cp.Constraint:
    """Membership constraint certifying that the Fisher-ratio auxiliary t is
    supported by the covariance; combined with t >= t_floor it enforces the
    angle-variance cap."""
    a, ad = model.resp, model.resp_dot
    s_dd = ad.conj().T @ ad
    s_da = ad.conj().T @ a
    s_aa = a.conj().T @ a
    u11 = cp.reshape(cp.real(cp.trace(s_dd @ w_cov)) - t, (1, 1), order="F")
    u12 = cp.reshape(cp.trace(s_da @ w_cov), (1, 1), order="F")
    u21 = cp.reshape(cp.trace(s_da.conj().T @ w_cov), (1, 1), order="F")
    u22 = cp.reshape(cp.real(cp.trace(s_aa @ w_cov)), (1, 1), order="F")
    block = cp.bmat([[u11, u12], [u21, u22]])
    return _hermitian_psd(block)


def sensing_lmi_matrix(model: SensingModel, w_cov: np.ndarray, t: float) -> np.ndarray:
    """Numeric counterpart of the sensing constraint matrix, for post-solve checks."""
    a, ad = model.resp, model.resp_dot
    t_dd = np.trace(ad.conj().T @ ad @ w_cov)
    t_da = np.trace(ad.conj().T @ a @ w_cov)
    t_aa = np.trace(a.conj().T @ a @ w_cov)
    block = np.array([[t_dd - t, t_da], [np.conj(t_da), t_aa]])
    return (block + block.conj().T) / 2


def _covert_border_const(ratio_cap: float, sigma_w2: float, beta_w: float,
                         d_aw: float, alpha_w: float) -> float:
    # noise term scaled out of the echo gain: d^alpha sigma^2 (cap - 1) / beta
    return d_aw ** alpha_w * sigma_w2 * (ratio_cap - 1.0) / beta_w


def _tx_steering(model: SensingModel) -> np.ndarray:
    return steering_ula(model.theta_hat, model.n_tx, model.spacing, model.wavelength)


def robust_covert_lmi(model: SensingModel, w_b_cov, w_c_cov, zeta, t,
                      ratio_cap: float, sigma_w2: float, beta_w: float,
                      d_aw: float, alpha_w: float) -> cp.Constraint:
    """S-procedure certificate that the power ratio stays below the cap for every
    warden angle inside the three-sigma uncertainty interval.

    ``zeta`` is a fixed non-negative number here (the alternating solver owns
    it) while ``t`` may be a variable; the product enters the top-left block
    so the constraint stays affine in the matrix variables and t.
    """
    n = model.n_tx
    a = _tx_steering(model).reshape(-1, 1)
    w_bar = (ratio_cap - 1.0) * w_c_cov - w_b_cov
    border = _covert_border_const(ratio_cap, sigma_w2, beta_w, d_aw, alpha_w)
    coef = zeta * 2.0 * abs(model.alpha_echo) ** 2 * model.snapshots / (model.k_gain * model.sigma_a2)
    top_left = w_bar + (coef * t) * np.eye(n)
    off = w_bar @ a
    corner = cp.reshape(cp.real(a.conj().T @ w_bar @ a) + border - zeta, (1, 1), order="F")
    block = cp.bmat([[top_left, off], [off.H, corner]])
    return _hermitian_psd(block)


def fixed_ball_covert_lmi(w_b_cov, w_c_cov, zeta, steering_vec: np.ndarray,
                          delta: float, ratio_cap: float, sigma_w2: float,
                          beta_w: float, d_aw: float, alpha_w: float) -> cp.Constraint:
    """Same certificate for a fixed uncertainty radius delta = cap on squared
    steering error; here the multiplier may be a variable because nothing
    multiplies it."""
    n = steering_vec.size
    a = steering_vec.reshape(-1, 1)
    w_bar = (ratio_cap - 1.0) * w_c_cov - w_b_cov
    border = _covert_border_const(ratio_cap, sigma_w2, beta_w, d_aw, alpha_w)
    top_left = w_bar + zeta * np.eye(n)
    off = w_bar @ a
    corner = cp.reshape(cp.real(a.conj().T @ w_bar @ a) + border - zeta * delta, (1, 1), order="F")
    block = cp.bmat([[top_left, off], [off.H, corner]])
    return _hermitian_psd(block)


def robust_covert_matrix(model: SensingModel, w_b_cov: np.ndarray, w_c_cov: np.ndarray,
                         zeta: float, t: float, ratio_cap: float, sigma_w2: float,
                         beta_w: float, d_aw: float, alpha_w: float) -> np.ndarray:
    """Numeric S-procedure matrix for a candidate multiplier, used by the
    feasibility step and post-solve eigenvalue rechecks."""
    n = model.n_tx
    a = _tx_steering(model).reshape(-1, 1)
    w_bar = (ratio_cap - 1.0) * w_c_cov - w_b_cov
    border = _covert_border_const(ratio_cap, sigma_w2, beta_w, d_aw, alpha_w)
    coef = zeta * 2.0 * abs(model.alpha_echo) ** 2 * model.snapshots / (model.k_gain * model.sigma_a2)
    top_left = w_bar + coef * t * np.eye(n)
    off = w_bar @ a
    corner = np.real(a.conj().T @ w_bar @ a) + border - zeta
    block = np.block([[top_left, off], [off.conj().T, corner.reshape(1, 1)]])
    return (block + block.conj().T) / 2


@dataclass
class ConicProgram:
    """A named-variable conic program, objective always maximized."""

    variables: dict = field(default_factory=dict)
    constraints: list = field(default_factory=list)
    objective: object = None

    def hermitian(self, name: str, n: int) -> cp.Variable:
        if name in self.variables:
            raise InvalidArgumentError(f"variable '{name}' already declared")
        var = cp.Variable((n, n), hermitian=True, name=name)
        self.variables[name] = var
        return var

    def scalar(self, name: str, nonneg: bool = False) -> cp.Variable:
        if name in self.variables:
            raise InvalidArgumentError(f"variable '{name}' already declared")
        var = cp.Variable(nonneg=nonneg, name=name)
        self.variables[name] = var
        return var

    def add(self, *constraints) -> None:
        self.constraints.extend(constraints)

    def maximize(self, expr) -> None:
        self.objective = expr


@dataclass
class ConicResult:
    status: str                 # optimal | infeasible | unbounded | numerical_failure
    values: dict | None
    objective: float | None
    max_violation: float | None
    solver: str
    accurate: bool = True


_STATUS_MAP = {
    cp.OPTIMAL: ("optimal", True),
    cp.OPTIMAL_INACCURATE: ("optimal", False),
    cp.INFEASIBLE: ("infeasible", True),
    cp.INFEASIBLE_INACCURATE: ("infeasible", False),
    cp.UNBOUNDED: ("unbounded", True),
    cp.UNBOUNDED_INACCURATE: ("unbounded", False),
}


def solve_conic(prog: ConicProgram, options: dict | None = None) -> ConicResult:
    """Solve with the primary backend, fall back to the second on failure.

    Non-optimal outcomes always surface as a typed status, never a silent
    zero.  On success the variable values and the worst primal constraint
    violation are reported.
    """
    options = options or {}
    problem = cp.Problem(cp.Maximize(prog.objective), prog.constraints)
    solvers = options.get("solvers", ["CLARABEL", "SCS"])
    last_status = "numerical_failure"
    for solver_name in solvers:
        kwargs = {}
        if solver_name == "SCS":
            kwargs = {"eps": options.get("tol", 1e-8), "max_iters": 50000}
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")  # inaccurate-solution warnings are handled via status
                problem.solve(solver=solver_name, **kwargs)
        except (cp.error.SolverError, ValueError, ArithmeticError) as exc:
            log.debug("solver %s failed: %s", solver_name, exc)
            continue
        mapped = _STATUS_MAP.get(problem.status)
        if mapped is None:
            last_status = "numerical_failure"
            continue
        status, accurate = mapped
        if status == "optimal":
            values = {name: var.value for name, var in prog.variables.items()}
            viol = 0.0
            for con in prog.constraints:
                v = con.violation()
                viol = max(viol, float(np.max(v)) if np.ndim(v) else float(v))
            return ConicResult(status, values, float(problem.value), viol,
                               solver_name, accurate)
        if accurate:
            return ConicResult(status, None, None, None, solver_name, True)
        last_status = status
    return ConicResult(last_status, None, None, None, "none", False)
