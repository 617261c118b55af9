"""End-to-end beamforming optimizers.

All schemes share one penalty-based successive-approximation engine over the
lifted matrices (transmit covariances and the surface phase outer product):

* known warden location with exact CSI,
* sensing-based imperfect CSI (alternating with the S-procedure multiplier),
* norm-bounded imperfect CSI (fixed uncertainty ball),
* the OMA baseline (per-slot solves plus a time-share line).

Problems are solved in noise-normalized units: each cascade is divided by its
receiver's noise standard deviation so objective values are SINRs and the
conic data stays well scaled.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import cvxpy as cp
import numpy as np

from . import convex_kit as ck
from .channel import ChannelSet, steering_ula
from .config import SolveOptions, SystemConfig
from .covertness import covert_ratio_limit
from .errors import InvalidArgumentError, UnidentifiableAngleError
from .sensing import SensingModel, crb, make_sensing_model

log = logging.getLogger(__name__)

_ASCENT_SLACK = 1e-8


@dataclass(frozen=True)
class ExpansionPoint:
    """Current iterate the convex surrogates are expanded around."""

    v_mat: np.ndarray
    w_b: np.ndarray
    w_c: np.ndarray

    def __post_init__(self):
        d = np.diag(self.v_mat)
        if np.max(np.abs(d - 1.0)) > 1e-8:
            raise InvalidArgumentError("expansion point must have unit diagonal phases")


@dataclass
class LiftedSolution:
    """Full output of any solver run; matrices are None unless status is optimal."""

    status: str
    scheme: str = ""
    W_b: np.ndarray | None = None
    W_c: np.ndarray | None = None
    V: np.ndarray | None = None
    w_b: np.ndarray | None = None
    w_c: np.ndarray | None = None
    v: np.ndarray | None = None
    covert_rate: float | None = None
    carol_rate: float | None = None
    covert_ratio: float | None = None
    achieved_crb: float | None = None
    trajectory: list = field(default_factory=list)   # (outer, inner, objective) per accepted step
    ao_trajectory: list = field(default_factory=list)
    gap_v: float | None = None
    wb_eig_ratio: float | None = None
    wc_eig_ratio: float | None = None
    qos_slack: float | None = None
    power_slack: float | None = None
    sic_order_ok: bool | None = None
    iterations: int = 0
    tau_bob: float | None = None                     # OMA time share
    v_carol: np.ndarray | None = None                # OMA public-slot phases
    diagnostics: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# shared scaffolding


@dataclass
class _Scaled:
    """Noise-normalized problem data shared by all schemes."""

    gb: np.ndarray          # cascade to the covert user over noise std
    gc: np.ndarray
    u_w: np.ndarray         # unit-norm known-warden channel direction
    sw_norm: float          # warden noise over squared channel norm
    ratio_cap: float
    rho: float              # QoS SINR floor


def _scale(cfg: SystemConfig, ch: ChannelSet) -> _Scaled:
    u = ch.h_aw / np.linalg.norm(ch.h_aw)
    return _Scaled(
        gb=ch.g_b / np.sqrt(cfg.noise_b),
        gc=ch.g_c / np.sqrt(cfg.noise_c),
        u_w=u,
        sw_norm=cfg.noise_w / np.linalg.norm(ch.h_aw) ** 2,
        ratio_cap=covert_ratio_limit(cfg.epsilon, cfg.channel_uses),
        rho=2.0 ** cfg.qos_rate - 1.0,
    )


def extract_rank_one(x_mat: np.ndarray, unit_modulus: bool = False) -> np.ndarray:
    """Dominant-eigenpair extraction; optionally project each element to the unit circle."""
    eigs, vecs = np.linalg.eigh(x_mat)
    top, u = eigs[-1], vecs[:, -1]
    if top <= 0:
        log.warning("extract_rank_one called on a (near-)zero matrix")
        return np.zeros(x_mat.shape[0], dtype=complex)
    if unit_modulus:
        return np.exp(1j * np.angle(u))
    return np.sqrt(top) * u


def _eig_ratio(x_mat: np.ndarray) -> float:
    eigs = np.linalg.eigvalsh(x_mat)
    if eigs[-1] <= 0 or len(eigs) < 2:
        return 0.0
    return float(abs(eigs[-2]) / eigs[-1])


def _true_penalized(sc: _Scaled, v_mat: np.ndarray, w_tgt: np.ndarray, eta: float,
                    target: str) -> float:
    g = sc.gb if target == "bob" else sc.gc
    gain = float(np.real(np.trace(v_mat @ g @ w_tgt @ g.conj().T)))
    return gain - eta * ck.rank_one_gap(v_mat)


@dataclass
class _Context:
    """What distinguishes one scheme's conic subproblem from another's."""

    covert: str                    # known | sensing_robust | fixed_ball | none
    target: str = "bob"            # which cascade the objective maximizes
    with_qos: bool = True          # NOMA decoding constraints present
    sensing_cap: bool = False      # include the angle-variance cap (needs t)
    model: SensingModel | None = None
    zeta: float = 0.0              # fixed multiplier (sensing_robust)
    delta: float = 0.0             # fixed uncertainty radius (fixed_ball)
    silent_idle: bool = False      # warden hears nothing under the idle hypothesis
    single: str | None = None      # OMA slot: pin the other beam to zero


def _covert_constraints(ctx: _Context, cfg: SystemConfig, sc: _Scaled, w_b, w_c, t):
    """Covertness constraints for the scheme at hand, in solver units."""
    cap = sc.ratio_cap
    cons = []
    wc_eff = 0.0 * w_c if ctx.silent_idle else w_c
    if ctx.covert == "known":
        u_outer = np.outer(sc.u_w, sc.u_w.conj())
        lhs = cp.real(cp.trace(u_outer @ w_b))
        idle = sc.sw_norm if ctx.silent_idle else cp.real(cp.trace(u_outer @ w_c)) + sc.sw_norm
        cons.append(lhs <= (cap - 1.0) * idle)
    elif ctx.covert == "sensing_robust":
        model = ctx.model
        if model.k_gain == 0.0:
            # single-antenna or endfire estimate: no steering uncertainty survives,
            # fall back to the exact-CSI constraint at the estimated angle
            cons.extend(_covert_constraints(
                replace(ctx, covert="known"), cfg, sc, w_b, w_c, t))
        else:
            cons.append(ck.robust_covert_lmi(
                model, w_b, wc_eff, ctx.zeta, t, cap,
                cfg.noise_w, cfg.beta_w, cfg.d_aw, cfg.alpha_w))
    elif ctx.covert == "fixed_ball":
        if ctx.delta <= 0.0:
            cons.extend(_covert_constraints(
                replace(ctx, covert="known"), cfg, sc, w_b, w_c, t))
        else:
            a = steering_ula(cfg.theta_w, cfg.n_tx, cfg.element_spacing, cfg.carrier_wavelength)
            zeta_var = cp.Variable(nonneg=True)
            cons.append(ck.fixed_ball_covert_lmi(
                w_b, wc_eff, zeta_var, a, ctx.delta, cap,
                cfg.noise_w, cfg.beta_w, cfg.d_aw, cfg.alpha_w))
    elif ctx.covert != "none":
        raise InvalidArgumentError(f"unknown covert constraint kind '{ctx.covert}'")
    return cons


def _build_step(cfg: SystemConfig, sc: _Scaled, ctx: _Context,
                point: ExpansionPoint, eta: float) -> ck.ConicProgram:
    """One convexified subproblem around the expansion point."""
    m = point.v_mat.shape[0]
    n = cfg.n_tx
    prog = ck.ConicProgram()
    v = prog.hermitian("V", m)
    w_b = prog.hermitian("W_b", n)
    w_c = prog.hermitian("W_c", n)
    needs_t = ctx.sensing_cap and ctx.model is not None and ctx.model.k_gain > 0.0
    t = prog.scalar("t", nonneg=True) if needs_t else None

    g_obj = sc.gb if ctx.target == "bob" else sc.gc
    w_obj = w_b if ctx.target == "bob" else w_c
    w_obj0 = point.w_b if ctx.target == "bob" else point.w_c
    lifted = g_obj @ w_obj @ g_obj.conj().T
    lifted0 = g_obj @ w_obj0 @ g_obj.conj().T
    gain_lb = ck.f_lb(v, lifted, point.v_mat, lifted0)
    penalty = cp.real(cp.trace(v)) - ck.linearize_spectral(v, point.v_mat)
    prog.maximize(gain_lb - eta * penalty)

    prog.add(v >> 0, w_b >> 0, w_c >> 0)
    prog.add(cp.diag(v) == np.ones(m))
    prog.add(cp.real(cp.trace(w_b) + cp.trace(w_c)) <= cfg.power)
    if ctx.single == "bob":
        prog.add(w_c == np.zeros((n, n)))
    elif ctx.single == "carol":
        prog.add(w_b == np.zeros((n, n)))

    if ctx.with_qos and sc.rho > 0:
        for g in (sc.gc, sc.gb):
            interf = g @ w_b @ g.conj().T
            interf0 = g @ point.w_b @ g.conj().T
            wanted = g @ w_c @ g.conj().T
            wanted0 = g @ point.w_c @ g.conj().T
            prog.add(sc.rho * ck.f_ub(v, interf, point.v_mat, interf0) + sc.rho
                     <= ck.f_lb(v, wanted, point.v_mat, wanted0))

    if needs_t:
        prog.add(ck.schur_sensing_lmi(ctx.model, w_b + w_c, t))
        prog.add(t >= ctx.model.t_floor)
    prog.add(*_covert_constraints(ctx, cfg, sc, w_b, w_c, t))
    return prog


def sca_step(cfg: SystemConfig, ch: ChannelSet, point: ExpansionPoint,
             eta: float, ctx: _Context | None = None) -> tuple[dict | None, str]:
    """Solve one convexified subproblem; returns the new iterate pieces and status."""
    sc = _scale(cfg, ch)
    ctx = ctx or _Context(covert="known")
    prog = _build_step(cfg, sc, ctx, point, eta)
    res = ck.solve_conic(prog)
    if res.status != "optimal":
        return None, res.status
    out = {k: res.values[k] for k in ("V", "W_b", "W_c")}
    out["t"] = res.values.get("t")
    out["objective"] = res.objective
    return out, "optimal"


def _penalty_solve(cfg: SystemConfig, ch: ChannelSet, ctx: _Context,
                   point: ExpansionPoint, opts: SolveOptions,
                   accept_first: bool = False):
    """Two-loop penalty iteration: inner ascent passes, outer penalty growth.

    The logged trajectory holds the true (non-surrogate) penalized objective
    of every accepted iterate; a step whose true objective drops below the
    incumbent is rejected, which keeps the trajectory non-decreasing under
    inexact subproblem solves.
    """
    sc = _scale(cfg, ch)
    eta = opts.penalty_init
    v_n, wb_n, wc_n = point.v_mat, point.w_b, point.w_c
    needs_t = ctx.sensing_cap and ctx.model is not None and ctx.model.k_gain > 0
    t_val = ctx.model.t_floor if needs_t else None
    trajectory = []
    n_solves = 0
    status = "optimal"
    first_pending = accept_first
    for outer in range(opts.max_outer):
        f_cur = _true_penalized(sc, v_n, wb_n if ctx.target == "bob" else wc_n,
                                eta, ctx.target)
        for inner in range(opts.max_inner):
            prog = _build_step(cfg, sc, ctx,
                               ExpansionPoint(v_n, wb_n, wc_n), eta)
            res = ck.solve_conic(prog)
            n_solves += 1
            if res.status != "optimal":
                if first_pending:
                    return None, res.status, trajectory, n_solves, t_val
                status = res.status
                break
            cand_v, cand_wb, cand_wc = (res.values["V"], res.values["W_b"],
                                        res.values["W_c"])
            f_new = _true_penalized(sc, cand_v,
                                    cand_wb if ctx.target == "bob" else cand_wc,
                                    eta, ctx.target)
            if not first_pending and f_new < f_cur - _ASCENT_SLACK * max(1.0, abs(f_cur)):
                break  # solver noise; keep the incumbent
            first_pending = False
            v_n, wb_n, wc_n = cand_v, cand_wb, cand_wc
            if "t" in res.values:
                t_val = float(res.values["t"])
            trajectory.append((outer, inner, f_new))
            rel = abs(f_new - f_cur) / max(1.0, abs(f_cur))
            f_cur = f_new
            if rel < opts.inner_tol:
                break
        if status != "optimal":
            break
        if ck.rank_one_gap(v_n) <= opts.gap_tol:
            break
        eta *= opts.penalty_scale
    return (v_n, wb_n, wc_n), status, trajectory, n_solves, t_val


# ---------------------------------------------------------------------------
# initialization


def init_feasible(cfg: SystemConfig, ch: ChannelSet,
                  null_dir: np.ndarray | None = None) -> ExpansionPoint:
    """Deterministic feasible start.

    Surface phases co-phase the cascade toward the public user; the public
    beam is maximum-ratio with a 3 dB margin over the QoS floor; the covert
    beam takes a sliver of power projected away from the warden direction so
    the covertness constraint starts inactive.  Falls back to a feasibility
    program (fixed phases, slack-maximizing beams) when the closed-form
    start misses QoS.
    """
    sc = _scale(cfg, ch)
    null_dir = sc.u_w if null_dir is None else null_dir / np.linalg.norm(null_dir)
    w_mrt = np.linalg.svd(sc.gc)[2][0].conj()
    z = sc.gc @ w_mrt
    v0 = np.exp(1j * np.angle(z))
    gb0 = v0.conj() @ sc.gb
    gc0 = v0.conj() @ sc.gc

    bob_dir = gb0.conj() / np.linalg.norm(gb0)
    bob_dir = bob_dir - null_dir * (null_dir.conj() @ bob_dir)
    nrm = np.linalg.norm(bob_dir)
    if nrm < 1e-12:
        # covert cascade parallel to the warden: fall back to any orthonormal leg
        basis = np.linalg.qr(np.column_stack(
            [null_dir, np.eye(cfg.n_tx, dtype=complex)]))[0]
        bob_dir = basis[:, 1] if cfg.n_tx > 1 else np.zeros(cfg.n_tx, dtype=complex)
    else:
        bob_dir = bob_dir / nrm
    p_bob = 1e-3 * cfg.power if np.linalg.norm(bob_dir) > 0 else 0.0
    w_b0 = np.sqrt(p_bob) * bob_dir

    if sc.rho > 0:
        carol_dir = gc0.conj() / np.linalg.norm(gc0)
        need = 2.0 * sc.rho * max(
            (np.abs(gb0 @ w_b0) ** 2 + 1.0) / np.abs(gb0 @ carol_dir) ** 2,
            (np.abs(gc0 @ w_b0) ** 2 + 1.0) / np.abs(gc0 @ carol_dir) ** 2,
        )
        p_carol = min(need, cfg.power - p_bob)
        w_c0 = np.sqrt(p_carol) * carol_dir
        sinr_c = min(
            np.abs(gb0 @ w_c0) ** 2 / (np.abs(gb0 @ w_b0) ** 2 + 1.0),
            np.abs(gc0 @ w_c0) ** 2 / (np.abs(gc0 @ w_b0) ** 2 + 1.0),
        )
        if sinr_c < sc.rho:
            return _init_by_feasibility(cfg, sc, v0, null_dir)
    else:
        w_c0 = np.zeros(cfg.n_tx, dtype=complex)
    return ExpansionPoint(_unit_diag_outer(v0),
                          np.outer(w_b0, w_b0.conj()),
                          np.outer(w_c0, w_c0.conj()))


def _unit_diag_outer(v: np.ndarray) -> np.ndarray:
    out = np.outer(v, v.conj())
    np.fill_diagonal(out, 1.0)  # |v_m|^2 is 1 only up to roundoff
    return out


def _init_by_feasibility(cfg: SystemConfig, sc: _Scaled, v0: np.ndarray,
                         null_dir: np.ndarray) -> ExpansionPoint:
    """Slack-maximizing conic program with the surface phases frozen."""
    n = cfg.n_tx
    gb0 = (v0.conj() @ sc.gb).reshape(1, -1)
    gc0 = (v0.conj() @ sc.gc).reshape(1, -1)
    w_b = cp.Variable((n, n), hermitian=True)
    w_c = cp.Variable((n, n), hermitian=True)
    s = cp.Variable()
    u_outer = np.outer(sc.u_w, sc.u_w.conj())

    def q(row, w):
        return cp.real(row @ w @ row.conj().T)[0, 0]

    cons = [w_b >> 0, w_c >> 0,
            cp.real(cp.trace(w_b) + cp.trace(w_c)) <= cfg.power,
            q(gc0, w_c) >= sc.rho * (q(gc0, w_b) + 1.0) + s,
            q(gb0, w_c) >= sc.rho * (q(gb0, w_b) + 1.0) + s,
            cp.real(cp.trace(u_outer @ w_b))
            <= (sc.ratio_cap - 1.0) * (cp.real(cp.trace(u_outer @ w_c)) + sc.sw_norm)]
    prob = cp.Problem(cp.Maximize(s), cons)
    try:
        prob.solve(solver="CLARABEL")
    except cp.error.SolverError:
        prob.solve(solver="SCS")
    if prob.status not in ("optimal", "optimal_inaccurate") or prob.value < 0:
        raise InfeasibleScenario("no beam pair meets the QoS floor at this power budget")
    return ExpansionPoint(_unit_diag_outer(v0), w_b.value, w_c.value)


class InfeasibleScenario(RuntimeError):
    """The scenario point admits no feasible design."""


# ---------------------------------------------------------------------------
# finishing: extraction, rescue scaling, diagnostics


def _nominal_ratio(cfg: SystemConfig, ch: ChannelSet, w_b: np.ndarray, w_c: np.ndarray,
                   silent_idle: bool = False) -> float:
    h = ch.h_aw
    leak_b = float(np.abs(h.conj() @ w_b) ** 2) if w_b.ndim == 1 else \
        float(np.real(h.conj() @ w_b @ h))
    leak_c = 0.0
    if not silent_idle:
        leak_c = float(np.abs(h.conj() @ w_c) ** 2) if w_c.ndim == 1 else \
            float(np.real(h.conj() @ w_c @ h))
    lam0 = leak_c + cfg.noise_w
    return (leak_b + lam0) / lam0


def _finish_noma(cfg: SystemConfig, ch: ChannelSet, scheme: str, mats, trajectory,
                 n_solves: int, model: SensingModel | None,
                 ao_trajectory=None) -> LiftedSolution:
    sc = _scale(cfg, ch)
    v_mat, wb_mat, wc_mat = mats
    v = extract_rank_one(v_mat, unit_modulus=True)
    w_b = extract_rank_one(wb_mat)
    w_c = extract_rank_one(wc_mat)

    # covertness is hard: if extraction pushed the ratio past the cap, shed
    # covert power until it sits exactly on it
    cap = sc.ratio_cap
    ratio = _nominal_ratio(cfg, ch, w_b, w_c)
    if ratio > cap * (1.0 + 1e-3):
        h = ch.h_aw
        lam0 = float(np.abs(h.conj() @ w_c) ** 2) + cfg.noise_w
        leak = float(np.abs(h.conj() @ w_b) ** 2)
        scale = np.sqrt((cap - 1.0) * lam0 / leak) if leak > 0 else 0.0
        w_b = min(1.0, scale) * w_b
        ratio = _nominal_ratio(cfg, ch, w_b, w_c)

    gb0 = v.conj() @ sc.gb
    gc0 = v.conj() @ sc.gc
    sinr_b = float(np.abs(gb0 @ w_b) ** 2)
    sinr_c = float(min(
        np.abs(gb0 @ w_c) ** 2 / (np.abs(gb0 @ w_b) ** 2 + 1.0),
        np.abs(gc0 @ w_c) ** 2 / (np.abs(gc0 @ w_b) ** 2 + 1.0),
    )) if np.linalg.norm(w_c) > 0 else 0.0
    power_used = float(np.linalg.norm(w_b) ** 2 + np.linalg.norm(w_c) ** 2)
    sol = LiftedSolution(
        status="optimal", scheme=scheme,
        W_b=wb_mat, W_c=wc_mat, V=v_mat, w_b=w_b, w_c=w_c, v=v,
        covert_rate=float(np.log2(1.0 + sinr_b)),
        carol_rate=float(np.log2(1.0 + sinr_c)),
        covert_ratio=ratio,
        trajectory=trajectory,
        ao_trajectory=ao_trajectory or [],
        gap_v=ck.rank_one_gap(v_mat),
        wb_eig_ratio=_eig_ratio(wb_mat),
        wc_eig_ratio=_eig_ratio(wc_mat),
        qos_slack=float(np.log2(1.0 + sinr_c) - cfg.qos_rate),
        power_slack=float(cfg.power - power_used),
        sic_order_ok=bool(np.linalg.norm(gb0) > np.linalg.norm(gc0)),
        iterations=n_solves,
    )
    if model is not None:
        sol.achieved_crb = crb(model, wb_mat + wc_mat)
    return sol


def _failed(status: str, scheme: str, trajectory=None, n_solves=0, diag=None) -> LiftedSolution:
    return LiftedSolution(status=status, scheme=scheme,
                          trajectory=trajectory or [], iterations=n_solves,
                          diagnostics=diag or {})


# ---------------------------------------------------------------------------
# the four schemes


def solve_known_warden(cfg: SystemConfig, ch: ChannelSet,
                       opts: SolveOptions | None = None) -> LiftedSolution:
    """Covert-rate maximization with the warden's channel known exactly."""
    opts = opts or cfg.solver
    try:
        point = init_feasible(cfg, ch)
    except InfeasibleScenario as exc:
        return _failed("infeasible", "known-pc", diag={"reason": str(exc)})
    ctx = _Context(covert="known")
    mats, status, trajectory, n_solves, _ = _penalty_solve(cfg, ch, ctx, point, opts)
    if status != "optimal" or mats is None:
        return _failed(status if status != "optimal" else "numerical_failure",
                       "known-pc", trajectory, n_solves)
    if ck.rank_one_gap(mats[0]) > opts.gap_tol:
        sol = _finish_noma(cfg, ch, "known-pc", mats, trajectory, n_solves, None)
        sol.status = "non_convergence"
        sol.diagnostics["reason"] = "rank-one gap above tolerance after max outer rounds"
        return sol
    return _finish_noma(cfg, ch, "known-pc", mats, trajectory, n_solves, None)


def min_feasible_multiplier(model: SensingModel, wb_mat: np.ndarray, wc_mat: np.ndarray,
                            t_val: float, ratio_cap: float, sigma_w2: float,
                            beta_w: float, d_aw: float, alpha_w: float) -> float | None:
    """Smallest non-negative S-procedure multiplier keeping the certificate PSD.

    The minimum eigenvalue is concave in the multiplier, so the feasible set
    is an interval; probe a log grid for any feasible point, then bisect the
    left edge.  Returns None when no multiplier works.
    """
    def min_eig(z):
        mat = ck.robust_covert_matrix(model, wb_mat, wc_mat, z, t_val, ratio_cap,
                                      sigma_w2, beta_w, d_aw, alpha_w)
        return float(np.linalg.eigvalsh(mat)[0])

    if min_eig(0.0) >= -1e-12:
        return 0.0
    z_feas = None
    for z in 10.0 ** np.arange(-12.0, 7.0, 0.5):
        if min_eig(z) >= 0.0:
            z_feas = float(z)
            break
    if z_feas is None:
        return None
    lo, hi = 0.0, z_feas
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if min_eig(mid) >= 0.0:
            hi = mid
        else:
            lo = mid
    return hi


def max_margin_multiplier(model: SensingModel, wb_mat: np.ndarray, wc_mat: np.ndarray,
                          t_val: float, ratio_cap: float, sigma_w2: float,
                          beta_w: float, d_aw: float, alpha_w: float,
                          zeta_hint: float | None = None) -> float | None:
    """Multiplier maximizing the certificate's minimum eigenvalue.

    The minimal feasible multiplier sits on the certificate boundary of the
    current iterate, which freezes the next beamforming pass at that iterate;
    the max-margin point is the deterministic interior choice that leaves the
    pass the most room.  Found by a ternary search on the concave margin.
    ``zeta_hint`` seeds the probe grid (the incumbent multiplier is always
    feasible right after a beamforming pass, while the feasible interval can
    be too narrow for a coarse log grid alone).
    """
    def min_eig(z):
        mat = ck.robust_covert_matrix(model, wb_mat, wc_mat, z, t_val, ratio_cap,
                                      sigma_w2, beta_w, d_aw, alpha_w)
        return float(np.linalg.eigvalsh(mat)[0])

    grid = np.concatenate([[0.0], 10.0 ** np.arange(-12.0, 7.0, 0.25)])
    if zeta_hint is not None and zeta_hint > 0:
        grid = np.sort(np.concatenate([grid, zeta_hint * np.array([0.5, 1.0, 2.0])]))
    vals = [min_eig(z) for z in grid]
    best = int(np.argmax(vals))
    if vals[best] < -1e-9:
        return None
    lo = grid[best - 1] if best > 0 else 0.0
    hi = grid[best + 1] if best + 1 < len(grid) else grid[best] * 10.0
    for _ in range(120):
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        if min_eig(m1) < min_eig(m2):
            lo = m1
        else:
            hi = m2
    z_star = 0.5 * (lo + hi)
    return z_star if min_eig(z_star) >= min(vals[best], 0.0) else grid[best]


def robust_sca_pass(cfg: SystemConfig, ch: ChannelSet, model: SensingModel,
                    point: ExpansionPoint, zeta: float,
                    opts: SolveOptions, accept_first: bool = False):
    """Full penalty solve of the beamforming subproblem with the multiplier frozen."""
    ctx = _Context(covert="sensing_robust", sensing_cap=True, model=model, zeta=zeta)
    return _penalty_solve(cfg, ch, ctx, point, opts, accept_first=accept_first)


def solve_sensing_csi(cfg: SystemConfig, ch: ChannelSet,
                      model: SensingModel | None = None,
                      opts: SolveOptions | None = None) -> LiftedSolution:
    """Robust covert-rate maximization under sensing-based imperfect CSI.

    Alternates the beamforming subproblem (multiplier frozen) with the
    multiplier feasibility step until the objective settles.  The starting
    multiplier comes from running the feasibility step on the initialization,
    which keeps the first beamforming pass feasible.
    """
    opts = opts or cfg.solver
    model = model or make_sensing_model(cfg)
    sc = _scale(cfg, ch)
    a = steering_ula(cfg.theta_w, cfg.n_tx, cfg.element_spacing, cfg.carrier_wavelength)
    try:
        point = init_feasible(cfg, ch, null_dir=a)
    except InfeasibleScenario as exc:
        return _failed("infeasible", "sensing-sbic", diag={"reason": str(exc)})

    zeta = opts.multiplier_init
    t_init = model.t_floor
    if model.k_gain > 0:
        try:
            supportable = model.sigma_a2 / (
                2.0 * abs(model.alpha_echo) ** 2 * model.snapshots
                * crb(model, point.w_b + point.w_c))
            t_init = max(model.t_floor, supportable)
        except UnidentifiableAngleError:
            pass
        z0 = max_margin_multiplier(model, point.w_b, point.w_c, t_init,
                                   sc.ratio_cap, cfg.noise_w, cfg.beta_w,
                                   cfg.d_aw, cfg.alpha_w)
        if z0 is not None:
            zeta = z0

    ao_trajectory: list = []
    trajectory: list = []
    total_solves = 0
    t_val = t_init
    mats = (point.v_mat, point.w_b, point.w_c)
    final_diag: dict = {}
    for round_idx in range(opts.max_ao):
        out, status, traj, n_solves, t_new = robust_sca_pass(
            cfg, ch, model, ExpansionPoint(*mats), zeta, opts,
            accept_first=(round_idx == 0))
        total_solves += n_solves
        trajectory.extend(traj)
        if status != "optimal" or out is None:
            if round_idx == 0:
                return _failed(status if status != "optimal" else "numerical_failure",
                               "sensing-sbic", trajectory, total_solves)
            log.warning("alternating round %d stalled with status %s; keeping best iterate",
                        round_idx, status)
            break
        mats = out
        if t_new is not None:
            t_val = t_new
        gain = float(np.real(np.trace(mats[0] @ sc.gb @ mats[1] @ sc.gb.conj().T)))
        ao_trajectory.append(gain)
        if model.k_gain > 0:
            z_new = max_margin_multiplier(model, mats[1], mats[2], t_val,
                                          sc.ratio_cap, cfg.noise_w, cfg.beta_w,
                                          cfg.d_aw, cfg.alpha_w, zeta_hint=zeta)
            if z_new is None:
                sol = _finish_noma(cfg, ch, "sensing-sbic", mats, trajectory,
                                   total_solves, model, ao_trajectory)
                sol.diagnostics["ao_stall"] = "multiplier feasibility step failed"
                sol.diagnostics["t"] = t_val
                sol.diagnostics["zeta"] = zeta
                return sol
            zeta = z_new
        if len(ao_trajectory) > 1:
            rel = abs(ao_trajectory[-1] - ao_trajectory[-2]) / max(1.0, abs(ao_trajectory[-2]))
            if rel < opts.inner_tol:
                break
    sol = _finish_noma(cfg, ch, "sensing-sbic", mats, trajectory, total_solves,
                       model, ao_trajectory)
    sol.diagnostics.update(final_diag)
    sol.diagnostics["t"] = t_val
    sol.diagnostics["zeta"] = zeta
    return sol


def solve_norm_bounded_csi(cfg: SystemConfig, ch: ChannelSet,
                           dtheta_max: float | None = None,
                           opts: SolveOptions | None = None) -> LiftedSolution:
    """Robust covert-rate maximization with a fixed norm-bounded uncertainty.

    The uncertainty radius is the steering-error cap at a maximum angle error
    of ``dtheta_max`` (default: three sigma of the configured variance cap, so
    the two imperfect-CSI models coincide at the default).  No sensing
    constraint or auxiliary variable is needed; the multiplier enters
    affinely, so one penalty solve suffices.
    """
    opts = opts or cfg.solver
    model = make_sensing_model(cfg)
    if dtheta_max is None:
        dtheta_max = 3.0 * np.sqrt(cfg.crb_cap)
    delta = model.k_gain * (dtheta_max / 3.0) ** 2
    a = steering_ula(cfg.theta_w, cfg.n_tx, cfg.element_spacing, cfg.carrier_wavelength)
    try:
        point = init_feasible(cfg, ch, null_dir=a)
    except InfeasibleScenario as exc:
        return _failed("infeasible", "norm-nbic", diag={"reason": str(exc)})
    ctx = _Context(covert="fixed_ball", delta=delta)
    mats, status, trajectory, n_solves, _ = _penalty_solve(cfg, ch, ctx, point, opts,
                                                           accept_first=True)
    if status != "optimal" or mats is None:
        return _failed(status if status != "optimal" else "numerical_failure",
                       "norm-nbic", trajectory, n_solves)
    sol = _finish_noma(cfg, ch, "norm-nbic", mats, trajectory, n_solves, model)
    sol.diagnostics["delta"] = delta
    return sol


def _single_beam_pass(cfg: SystemConfig, ch: ChannelSet, ctx: _Context,
                      opts: SolveOptions):
    """Penalty solve for one OMA slot (single beam, no QoS coupling)."""
    sc = _scale(cfg, ch)
    g = sc.gb if ctx.target == "bob" else sc.gc
    w_mrt = np.linalg.svd(g)[2][0].conj()
    v0 = np.exp(1j * np.angle(g @ w_mrt))
    if ctx.target == "bob":
        null_dir = steering_ula(cfg.theta_w, cfg.n_tx, cfg.element_spacing,
                                cfg.carrier_wavelength)
        null_dir = null_dir / np.linalg.norm(null_dir)
        gb0 = v0.conj() @ g
        d0 = gb0.conj() / np.linalg.norm(gb0)
        d0 = d0 - null_dir * (null_dir.conj() @ d0)
        nrm = np.linalg.norm(d0)
        if nrm < 1e-12:
            d0 = np.zeros(cfg.n_tx, dtype=complex)
        else:
            d0 = d0 / nrm * np.sqrt(1e-3 * cfg.power)
        w0 = d0
    else:
        w0 = np.sqrt(0.9 * cfg.power) * w_mrt
    w_own = np.outer(w0, w0.conj())
    zero = np.zeros((cfg.n_tx, cfg.n_tx), dtype=complex)
    # the slot's own beam plays the covert role for bob, the public role for carol
    point = (ExpansionPoint(_unit_diag_outer(v0), w_own, zero)
             if ctx.target == "bob"
             else ExpansionPoint(_unit_diag_outer(v0), zero, w_own))
    return _penalty_solve(cfg, ch, ctx, point, opts, accept_first=True)


def solve_oma(cfg: SystemConfig, ch: ChannelSet, csi: str = "known-pc",
              opts: SolveOptions | None = None) -> LiftedSolution:
    """Orthogonal-access baseline: per-slot beam designs plus a time split.

    The public slot maximizes the public user's SNR (with the sensing-accuracy
    constraint when the CSI model is sensing-based, since the always-on public
    signal is what illuminates the warden); the covert slot maximizes the
    covert user's SNR under the slot-local covertness constraint, where the
    idle hypothesis is silence.  The time share then gives the public user
    exactly the QoS rate and hands the rest to the covert user.
    """
    opts = opts or cfg.solver
    model = make_sensing_model(cfg) if csi in ("sensing-sbic", "norm-nbic") else None

    carol_ctx = _Context(covert="none", target="carol", with_qos=False, single="carol")
    if csi == "sensing-sbic" and model.k_gain > 0:
        # the always-on public signal carries the sensing duty
        carol_ctx = _Context(covert="none", target="carol", with_qos=False,
                             single="carol", sensing_cap=True, model=model)
    carol_out, status_c, traj_c, n_c, t_carol = _single_beam_pass(
        cfg, ch, carol_ctx, opts)
    if status_c != "optimal" or carol_out is None:
        return _failed(status_c if status_c != "optimal" else "numerical_failure",
                       f"{csi}/oma", traj_c, n_c)
    v_c_mat, _, wc_mat = carol_out

    if csi == "known-pc" or (model is not None and model.k_gain == 0):
        bob_ctx = _Context(covert="known", target="bob", with_qos=False,
                           silent_idle=True, single="bob")
    elif csi == "sensing-sbic":
        # uncertainty ball fixed by the public slot's achieved sensing auxiliary
        t_eff = t_carol if t_carol is not None else model.t_floor
        delta = model.k_gain * model.sigma_a2 / (
            2.0 * abs(model.alpha_echo) ** 2 * model.snapshots * t_eff)
        bob_ctx = _Context(covert="fixed_ball", target="bob", with_qos=False,
                           delta=delta, silent_idle=True, single="bob")
    elif csi == "norm-nbic":
        delta = model.k_gain * cfg.crb_cap
        bob_ctx = _Context(covert="fixed_ball", target="bob", with_qos=False,
                           delta=delta, silent_idle=True, single="bob")
    else:
        raise InvalidArgumentError(f"unknown CSI model '{csi}'")
    bob_out, status_b, traj_b, n_b, _ = _single_beam_pass(cfg, ch, bob_ctx, opts)
    if status_b != "optimal" or bob_out is None:
        return _failed(status_b if status_b != "optimal" else "numerical_failure",
                       f"{csi}/oma", traj_b, n_c + n_b)
    v_b_mat, wb_mat, _ = bob_out

    sc = _scale(cfg, ch)
    v_c = extract_rank_one(v_c_mat, unit_modulus=True)
    v_b = extract_rank_one(v_b_mat, unit_modulus=True)
    w_c = extract_rank_one(wc_mat)
    w_b = extract_rank_one(wb_mat)

    cap = sc.ratio_cap
    ratio = _nominal_ratio(cfg, ch, w_b, w_c, silent_idle=True)
    if ratio > cap * (1.0 + 1e-3):
        leak = float(np.abs(ch.h_aw.conj() @ w_b) ** 2)
        scale = np.sqrt((cap - 1.0) * cfg.noise_w / leak) if leak > 0 else 0.0
        w_b = min(1.0, scale) * w_b
        ratio = _nominal_ratio(cfg, ch, w_b, w_c, silent_idle=True)

    snr_c = float(np.abs((v_c.conj() @ sc.gc) @ w_c) ** 2)
    snr_b = float(np.abs((v_b.conj() @ sc.gb) @ w_b) ** 2)
    rate_c_full = float(np.log2(1.0 + snr_c))
    rate_b_full = float(np.log2(1.0 + snr_b))
    if cfg.qos_rate > 0 and rate_c_full <= cfg.qos_rate:
        return _failed("infeasible", f"{csi}/oma", traj_c + traj_b, n_c + n_b,
                       diag={"reason": "public slot cannot reach the QoS rate"})
    tau_b = 1.0 if cfg.qos_rate == 0 else min(1.0, max(0.0, 1.0 - cfg.qos_rate / rate_c_full))

    sol = LiftedSolution(
        status="optimal", scheme=f"{csi}/oma",
        W_b=wb_mat, W_c=wc_mat, V=v_b_mat,
        w_b=w_b, w_c=w_c, v=v_b, v_carol=v_c,
        covert_rate=tau_b * rate_b_full,
        carol_rate=(1.0 - tau_b) * rate_c_full,
        covert_ratio=ratio,
        trajectory=traj_c + traj_b,
        gap_v=max(ck.rank_one_gap(v_b_mat), ck.rank_one_gap(v_c_mat)),
        wb_eig_ratio=_eig_ratio(wb_mat),
        wc_eig_ratio=_eig_ratio(wc_mat),
        qos_slack=0.0,
        power_slack=float(cfg.power - max(np.linalg.norm(w_b) ** 2,
                                          np.linalg.norm(w_c) ** 2)),
        sic_order_ok=None,
        iterations=n_c + n_b,
        tau_bob=tau_b,
    )
    if model is not None:
        sol.achieved_crb = crb(model, wc_mat)
    return sol
