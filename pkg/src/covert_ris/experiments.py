"""Scenario orchestration: single runs, sweeps, persistence and beampatterns.

One canonical CSV holds everything a figure needs; plots are derived
artifacts.  Records are replayable: a row's (scheme, access, sweep value,
seed) regenerates the same channels and solver trajectory.
"""

from __future__ import annotations

import csv
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .channel import ChannelSet, build_channel_set, steering_ula
from .config import SystemConfig, dbm2watt
from .errors import InvalidArgumentError, SchemaError
from .optimizer import (LiftedSolution, solve_known_warden, solve_norm_bounded_csi,
                        solve_oma, solve_sensing_csi)

CSV_HEADER = ["scenario", "access", "sweep_var", "sweep_value", "seed", "status",
              "covert_rate", "carol_rate", "covert_ratio", "achieved_crb",
              "iters", "wall_s"]

SCHEMES = ("known-pc", "sensing-sbic", "norm-nbic")
ACCESSES = ("noma", "oma")


@dataclass(frozen=True)
class ExperimentRecord:
    scenario: str
    access: str
    sweep_var: str
    sweep_value: float
    seed: int
    status: str
    covert_rate: float | None
    carol_rate: float | None
    covert_ratio: float | None
    achieved_crb: float | None
    iters: int
    wall_s: float

    def row(self) -> list:
        def fmt(x):
            return "" if x is None else repr(float(x))
        return [self.scenario, self.access, self.sweep_var, repr(float(self.sweep_value)),
                str(self.seed), self.status, fmt(self.covert_rate), fmt(self.carol_rate),
                fmt(self.covert_ratio), fmt(self.achieved_crb), str(self.iters),
                f"{self.wall_s:.3f}"]


@dataclass(frozen=True)
class SweepSpec:
    variable: str            # R0 | epsilon | P | gamma_crb | L | theta_R | M | n_tx
    values: tuple
    seeds: tuple
    schemes: tuple           # entries "scheme/access"

    def __post_init__(self):
        if not self.values or not self.seeds or not self.schemes:
            raise InvalidArgumentError("sweep values, seeds and schemes must be non-empty")
        for entry in self.schemes:
            scheme, access = split_scheme(entry)
            if scheme not in SCHEMES or access not in ACCESSES:
                raise InvalidArgumentError(f"unknown scheme entry '{entry}'")


def split_scheme(entry: str) -> tuple[str, str]:
    scheme, _, access = entry.partition("/")
    return scheme, access or "noma"


def apply_sweep_value(cfg: SystemConfig, variable: str, value: float) -> SystemConfig:
    """Sweep variables use presentation units (dBm for P, degrees for theta_R)."""
    if variable == "R0":
        return replace(cfg, qos_rate=float(value))
    if variable == "epsilon":
        return replace(cfg, epsilon=float(value))
    if variable == "P":
        return replace(cfg, power=dbm2watt(float(value)))
    if variable == "gamma_crb":
        return replace(cfg, crb_cap=float(value))
    if variable == "L":
        return replace(cfg, channel_uses=int(value))
    if variable == "theta_R":
        return replace(cfg, theta_r=np.deg2rad(float(value)))
    if variable == "M":
        side = int(round(np.sqrt(value)))
        if side * side == int(value):
            return replace(cfg, ris_rows=side, ris_cols=side)
        return replace(cfg, ris_rows=int(value), ris_cols=1)
    if variable == "n_tx":
        return replace(cfg, n_tx=int(value))
    raise InvalidArgumentError(f"unknown sweep variable '{variable}'")


def run_scenario(cfg: SystemConfig, scheme: str, access: str, seed: int,
                 sweep_var: str = "none", sweep_value: float = 0.0,
                 ) -> tuple[ExperimentRecord, LiftedSolution]:
    """Execute one scheme on one channel draw; deterministic in (cfg, seed)."""
    if scheme not in SCHEMES:
        raise InvalidArgumentError(f"unknown scheme '{scheme}'")
    if access not in ACCESSES:
        raise InvalidArgumentError(f"unknown access '{access}'")
    ch = build_channel_set(cfg, seed)
    start = time.perf_counter()
    if access == "oma":
        sol = solve_oma(cfg, ch, csi=scheme)
    elif scheme == "known-pc":
        sol = solve_known_warden(cfg, ch)
    elif scheme == "sensing-sbic":
        sol = solve_sensing_csi(cfg, ch)
    else:
        sol = solve_norm_bounded_csi(cfg, ch)
    wall = time.perf_counter() - start
    ok = sol.status == "optimal"
    rec = ExperimentRecord(
        scenario=scheme, access=access, sweep_var=sweep_var,
        sweep_value=sweep_value, seed=seed, status=sol.status,
        covert_rate=sol.covert_rate if ok else None,
        carol_rate=sol.carol_rate if ok else None,
        covert_ratio=sol.covert_ratio if ok else None,
        achieved_crb=sol.achieved_crb if ok else None,
        iters=sol.iterations, wall_s=wall)
    return rec, sol


def _sweep_point(args):
    cfg_base, variable, value, entry, seed = args
    scheme, access = split_scheme(entry)
    cfg = apply_sweep_value(cfg_base, variable, value)
    try:
        rec, _ = run_scenario(cfg, scheme, access, seed,
                              sweep_var=variable, sweep_value=float(value))
    except Exception as exc:  # a single bad point must not abort the sweep
        rec = ExperimentRecord(scheme, access, variable, float(value), seed,
                               f"error:{type(exc).__name__}", None, None, None,
                               None, 0, 0.0)
    return rec


def worker_count() -> int:
    env = os.environ.get("COVERT_RIS_THREADS")
    if env:
        return max(1, int(env))
    return min(os.cpu_count() or 1, 8)


def run_sweep(cfg: SystemConfig, spec: SweepSpec, out_dir: str) -> dict:
    """Run every (scheme, value, seed) point, write the canonical CSV and a
    per-scheme summary of means.  Points run in a process pool; output order
    is independent of scheduling."""
    os.makedirs(out_dir, exist_ok=True)
    jobs = [(cfg, spec.variable, value, entry, seed)
            for entry in spec.schemes for value in spec.values for seed in spec.seeds]
    workers = worker_count()
    if workers <= 1 or len(jobs) == 1:
        records = [_sweep_point(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_sweep_point, jobs))
    records.sort(key=lambda r: (r.scenario, r.access, r.sweep_value, r.seed))

    results_path = os.path.join(out_dir, f"sweep_{spec.variable}.csv")
    write_records(results_path, records)

    summary_path = os.path.join(out_dir, f"sweep_{spec.variable}_summary.csv")
    with open(summary_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["scenario", "access", "sweep_value",
                         "mean_covert_rate", "mean_carol_rate", "n_ok", "n_total"])
        keys = sorted({(r.scenario, r.access, r.sweep_value) for r in records})
        for scheme, access, value in keys:
            grp = [r for r in records
                   if (r.scenario, r.access, r.sweep_value) == (scheme, access, value)]
            ok = [r for r in grp if r.status == "optimal"]
            mean_cov = np.mean([r.covert_rate for r in ok]) if ok else ""
            mean_car = np.mean([r.carol_rate for r in ok]) if ok else ""
            writer.writerow([scheme, access, repr(float(value)),
                             mean_cov, mean_car, len(ok), len(grp)])
    return {"results": results_path, "summary": summary_path, "records": records}


def write_records(path: str, records: list[ExperimentRecord]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for rec in records:
            writer.writerow(rec.row())


def read_records(path: str) -> list[dict]:
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_HEADER:
            raise SchemaError(f"{path}: expected columns {CSV_HEADER}, got {reader.fieldnames}")
        return list(reader)


def beampattern(solution: LiftedSolution, cfg: SystemConfig,
                grid: np.ndarray) -> dict:
    """Transmit power density versus angle for the extracted beams.

    Each curve is normalized to its own maximum, so the table holds relative
    patterns in [0, 1]; the total uses the superimposed covariance.
    """
    if solution.w_b is None or solution.w_c is None:
        raise InvalidArgumentError("solution has no extracted beams")
    w_b = np.outer(solution.w_b, solution.w_b.conj())
    w_c = np.outer(solution.w_c, solution.w_c.conj())
    w_tot = w_b + w_c
    p_tot = np.empty(len(grid))
    p_bob = np.empty(len(grid))
    p_car = np.empty(len(grid))
    for i, th in enumerate(grid):
        a = steering_ula(th, cfg.n_tx, cfg.element_spacing, cfg.carrier_wavelength)
        p_tot[i] = float(np.real(a.conj() @ w_tot @ a))
        p_bob[i] = float(np.real(a.conj() @ w_b @ a))
        p_car[i] = float(np.real(a.conj() @ w_c @ a))

    def norm(p):
        top = p.max()
        return p / top if top > 0 else p
    return {"theta": np.asarray(grid), "p_total": norm(p_tot),
            "p_bob": norm(p_bob), "p_carol": norm(p_car),
            "raw_total": p_tot}


def save_solution(path: str, sol: LiftedSolution, cfg: SystemConfig,
                  scheme: str, access: str, seed: int) -> None:
    def vec(x):
        return None if x is None else {"re": np.real(x).tolist(), "im": np.imag(x).tolist()}
    payload = {
        "format": "covert-ris/solution/v1",
        "scheme": scheme, "access": access, "seed": seed,
        "status": sol.status,
        "covert_rate": sol.covert_rate, "carol_rate": sol.carol_rate,
        "covert_ratio": sol.covert_ratio, "achieved_crb": sol.achieved_crb,
        "n_tx": cfg.n_tx, "ris": [cfg.ris_rows, cfg.ris_cols],
        "wavelength_m": cfg.carrier_wavelength, "spacing_m": cfg.element_spacing,
        "theta_w_deg": float(np.rad2deg(cfg.theta_w)),
        "w_b": vec(sol.w_b), "w_c": vec(sol.w_c), "v": vec(sol.v),
        "v_carol": vec(sol.v_carol), "tau_bob": sol.tau_bob,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)


def load_solution(path: str) -> tuple[LiftedSolution, dict]:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("format") != "covert-ris/solution/v1":
        raise SchemaError(f"{path}: not a covert-ris solution file")
    required = ("w_b", "w_c", "n_tx", "wavelength_m", "spacing_m")
    missing = [k for k in required if payload.get(k) is None]
    if missing:
        raise SchemaError(f"{path}: missing fields {missing}")

    def vec(d):
        return None if d is None else np.array(d["re"]) + 1j * np.array(d["im"])
    sol = LiftedSolution(status=payload.get("status", "optimal"),
                         scheme=payload.get("scheme", ""),
                         w_b=vec(payload["w_b"]), w_c=vec(payload["w_c"]),
                         v=vec(payload.get("v")),
                         covert_rate=payload.get("covert_rate"),
                         carol_rate=payload.get("carol_rate"),
                         tau_bob=payload.get("tau_bob"))
    return sol, payload
