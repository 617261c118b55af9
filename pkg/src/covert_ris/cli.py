"""Command-line front end.

Subcommands:
  run          one (scheme, access, seed) scenario; writes a record CSV and a
               solution JSON next to it
  sweep        a full sweep over one variable; writes the canonical CSV, a
               summary, and the derived figure
  beampattern  renders the pattern table and figure for a saved solution
  validate     runs the bundled oracle suite; exit code 0 iff every check passes
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .config import SystemConfig, apply_profile, load_config
from .errors import ConfigError
from .experiments import (SweepSpec, beampattern, load_solution, run_scenario,
                          save_solution, split_scheme, write_records)
from .plots import emit_beampattern_plot, emit_plots


def _load(args) -> SystemConfig:
    cfg = load_config(args.config) if args.config else SystemConfig()
    if args.profile:
        cfg = apply_profile(cfg, args.profile)
    return cfg


def _cmd_run(args) -> int:
    cfg = _load(args)
    os.makedirs(args.out, exist_ok=True)
    rec, sol = run_scenario(cfg, args.scheme, args.access, args.seed)
    tag = f"{args.scheme}_{args.access}_seed{args.seed}"
    write_records(os.path.join(args.out, f"run_{tag}.csv"), [rec])
    if sol.status == "optimal":
        save_solution(os.path.join(args.out, f"solution_{tag}.json"),
                      sol, cfg, args.scheme, args.access, args.seed)
    rate = "-" if rec.covert_rate is None else f"{rec.covert_rate:.4f}"
    print(f"{args.scheme}/{args.access} seed {args.seed}: status={rec.status} "
          f"covert_rate={rate} wall={rec.wall_s:.1f}s")
    return 0 if rec.status == "optimal" else 1


def _cmd_sweep(args) -> int:
    cfg = _load(args)
    spec = SweepSpec(
        variable=args.var,
        values=tuple(float(v) for v in args.values.split(",")),
        seeds=tuple(int(s) for s in args.seeds.split(",")),
        schemes=tuple(args.schemes.split(",")),
    )
    out = run_sweep_entry(cfg, spec, args.out)
    figs = emit_plots([out["results"]], args.out)
    print(f"wrote {out['results']}")
    print(f"wrote {out['summary']}")
    for f in figs:
        print(f"wrote {f}")
    return 0


def run_sweep_entry(cfg, spec, out_dir):
    from .experiments import run_sweep

    return run_sweep(cfg, spec, out_dir)


def _cmd_beampattern(args) -> int:
    sol, payload = load_solution(args.solution)
    import dataclasses

    from .config import SystemConfig as SC
    cfg = dataclasses.replace(
        SC(), n_tx=payload["n_tx"],
        carrier_wavelength=payload["wavelength_m"],
        element_spacing=payload["spacing_m"],
        theta_w=np.deg2rad(payload.get("theta_w_deg", 0.0)))
    grid = np.linspace(-np.pi / 2, np.pi / 2, args.points)
    table = beampattern(sol, cfg, grid)
    os.makedirs(args.out, exist_ok=True)
    base = os.path.splitext(os.path.basename(args.solution))[0]
    csv_path = os.path.join(args.out, f"beampattern_{base}.csv")
    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write("theta_deg,p_total,p_bob,p_carol\n")
        for i in range(len(grid)):
            fh.write(f"{np.rad2deg(table['theta'][i]):.4f},{table['p_total'][i]:.8e},"
                     f"{table['p_bob'][i]:.8e},{table['p_carol'][i]:.8e}\n")
    fig = emit_beampattern_plot(table, cfg.theta_w, args.out, tag=base)
    print(f"wrote {csv_path}")
    print(f"wrote {fig}")
    return 0


def _cmd_validate(args) -> int:
    from .validation import validate_all

    reports = validate_all(seed=args.seed, quick=args.quick)
    all_ok = True
    for rep in reports:
        flag = "PASS" if rep.passed else "FAIL"
        print(f"[{flag}] {rep.name}: max deviation {rep.max_deviation:.3e} "
              f"(tol {rep.tolerance:.3e}, n={rep.samples}, seed={rep.seed})")
        all_ok &= rep.passed
    print("all checks passed" if all_ok else "SOME CHECKS FAILED")
    return 0 if all_ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="covert-ris",
                                description="Joint sensing and covert communication designer")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="solve one scenario")
    run.add_argument("--config", default=None)
    run.add_argument("--scheme", required=True,
                     choices=["known-pc", "sensing-sbic", "norm-nbic"])
    run.add_argument("--access", required=True, choices=["noma", "oma"])
    run.add_argument("--seed", type=int, required=True)
    run.add_argument("--out", required=True)
    run.add_argument("--profile", choices=["desk", "paper"], default=None)
    run.set_defaults(func=_cmd_run)

    sweep = sub.add_parser("sweep", help="sweep one variable across schemes and seeds")
    sweep.add_argument("--config", default=None)
    sweep.add_argument("--var", required=True,
                       choices=["R0", "epsilon", "P", "gamma_crb", "L",
                                "theta_R", "M", "n_tx"])
    sweep.add_argument("--values", required=True, help="comma-separated values")
    sweep.add_argument("--seeds", required=True, help="comma-separated seeds")
    sweep.add_argument("--schemes", required=True,
                       help="comma-separated scheme[/access] entries, e.g. known-pc/noma")
    sweep.add_argument("--out", required=True)
    sweep.add_argument("--profile", choices=["desk", "paper"], default=None)
    sweep.set_defaults(func=_cmd_sweep)

    bp = sub.add_parser("beampattern", help="render the pattern of a saved solution")
    bp.add_argument("--solution", required=True)
    bp.add_argument("--out", required=True)
    bp.add_argument("--points", type=int, default=721)
    bp.set_defaults(func=_cmd_beampattern)

    val = sub.add_parser("validate", help="run the oracle suite")
    val.add_argument("--seed", type=int, default=0)
    val.add_argument("--quick", action="store_true",
                     help="fewer Monte-Carlo trials")
    val.set_defaults(func=_cmd_validate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
