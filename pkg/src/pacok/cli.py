"""Command-line interface.

Subcommands: run, check, norm, energy, converge, coarsen, pvism.
Exit codes: 0 success, 2 configuration error, 3 violated certified
invariant, 4 numerical blowup.  Heavy imports happen inside the command
handlers so that the PACOK_THREADS cap is exported before numpy loads.
"""

from __future__ import annotations

import argparse
import os
import sys

from .errors import PacokError


def _apply_thread_cap() -> None:
    """Export PACOK_THREADS (0 = auto) to the usual pool size variables."""
    raw = os.environ.get("PACOK_THREADS", "").strip()
    if not raw:
        return
    try:
        cap = int(raw)
    except ValueError:
        print(f"error: config: PACOK_THREADS must be an integer, got '{raw}'", file=sys.stderr)
        raise SystemExit(2)
    if cap < 0:
        print(f"error: config: PACOK_THREADS must be >= 0, got {cap}", file=sys.stderr)
        raise SystemExit(2)
    if cap == 0:
        return
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, str(cap))


def _load_config(args):
    from .config import RunConfig, load_config

    cfg = load_config(args.config) if args.config else RunConfig()
    if getattr(args, "out", None):
        from dataclasses import replace

        cfg = replace(cfg, out=args.out)
    return cfg


def _ensure_out_dir(path: str) -> str:
    out = path or "."
    os.makedirs(out, exist_ok=True)
    return out


def cmd_run(args) -> int:
    from .experiments import run_with_snapshots
    from .stepping import SchemeState, check_conditions

    cfg = _load_config(args)
    grid = cfg.build_grid()
    params = cfg.build_params()
    spec = cfg.build_spec()
    op = cfg.build_op()
    potential = cfg.build_potential(grid)
    out = _ensure_out_dir(cfg.out)
    report = check_conditions(params, spec, op, grid, potential)
    state = SchemeState.initial(cfg.build_initial(grid))
    state, records = run_with_snapshots(
        state,
        params,
        spec,
        op,
        t_end=cfg.T,
        tol=cfg.tol,
        snapshot_times=cfg.snapshot_times,
        out_dir=out,
        record_every=cfg.monitor_every,
        potential=potential,
        report=report,
    )
    print(
        f"run finished: n={state.step_index} t={state.time:.6g} "
        f"min={records[-1].phi_min:.6g} max={records[-1].phi_max:.6g} "
        f"energy={records[-1].energy:.6g}"
    )
    print(f"series: {out}/series.csv")
    return 0


def cmd_check(args) -> int:
    from .stepping import check_conditions

    cfg = _load_config(args)
    grid = cfg.build_grid()
    potential = cfg.build_potential(grid)
    report = check_conditions(cfg.build_params(), cfg.build_spec(), cfg.build_op(), grid, potential)
    print(report.pretty())
    required = {
        "mpp": report.mpp_ok,
        "es": report.es_ok,
        "both": report.mpp_ok and report.es_ok,
        "none": True,
    }[args.require]
    if not required:
        print(f"error: invariant: requested guarantee '{args.require}' is not satisfied",
              file=sys.stderr)
        return 3
    return 0


def cmd_norm(args) -> int:
    from .spectral import estimate_linf_norm

    cfg = _load_config(args)
    print(f"{estimate_linf_norm(cfg.build_op(), cfg.build_grid()):.17g}")
    return 0


def cmd_energy(args) -> int:
    from .energy import discrete_energy
    from .grid import load_snapshot

    cfg = _load_config(args)
    phi, _t = load_snapshot(args.snapshot)
    potential = cfg.build_potential(phi.grid)
    e = discrete_energy(phi, cfg.build_params(), cfg.build_spec(), cfg.build_op(), potential)
    print("interfacial,well,longrange,penalty,total")
    print(f"{e.interfacial:.17g},{e.well:.17g},{e.longrange:.17g},{e.penalty:.17g},{e.total:.17g}")
    return 0


def cmd_converge(args) -> int:
    from .experiments import RateStudySetup, convergence_setups, rate_study

    if args.eps_factors:
        factors = [float(f) for f in args.eps_factors.split(",")]
        h = 2.0 / args.n
        rows = [
            (f"{factor:g}h", RateStudySetup(n=args.n, epsilon=factor * h, t_end=args.t_end),
             args.base_tau, args.levels, args.bench_tau)
            for factor in factors
        ]
    else:
        rows = convergence_setups(args.scale)
    lines = ["eps,tau,error,rate"]
    for label, setup, base_tau, levels, bench_tau in rows:
        result = rate_study(base_tau, levels, bench_tau, setup)
        print(f"eps = {label} (N = {setup.n}, T = {setup.t_end})")
        print(f"  {'tau':>12}  {'error':>12}  {'rate':>6}")
        for i, (tau, err) in enumerate(zip(result.taus, result.errors)):
            rate = f"{result.rates[i - 1]:.2f}" if i > 0 else "---"
            print(f"  {tau:>12.3e}  {err:>12.3e}  {rate:>6}")
            lines.append(f"{label},{tau:.17g},{err:.17g},{rate if i > 0 else ''}")
    if args.out:
        out = _ensure_out_dir(args.out)
        path = os.path.join(out, "rates.csv")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
        print(f"table: {path}")
    return 0


def cmd_coarsen(args) -> int:
    from .experiments import coarsening_run

    out = _ensure_out_dir(args.out) if args.out else None
    result = coarsening_run(
        args.dim,
        args.preset,
        scale=args.scale,
        seed=args.seed,
        out_dir=out,
    )
    last = result.records[-1]
    print(
        f"preset {result.preset.name} ({args.scale}): n={result.final.step_index} "
        f"t={result.final.time:.6g} bumps={result.bump_count} "
        f"min={last.phi_min:.6g} max={last.phi_max:.6g} energy={last.energy:.6g}"
    )
    if out:
        print(f"series: {out}/series.csv")
    return 0


def cmd_pvism(args) -> int:
    from .experiments import pvism_compare

    out = _ensure_out_dir(args.out) if args.out else None
    result = pvism_compare(tau=args.tau, t_max=args.t_max, out_dir=out)
    c_lo, c_hi = result.cubic_bounds
    l_lo, l_hi = result.linear_bounds
    print(f"cubic  indicator: min={c_lo:.6e} max={c_hi:.6e} "
          f"(t={result.cubic_final.time:.6g})")
    print(f"linear indicator: min={l_lo:.6e} max={l_hi:.6e} "
          f"(t={result.linear_final.time:.6g})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pacok",
        description="Bound-preserving semi-implicit solver for penalized "
        "Allen-Cahn dynamics with long-range interactions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config(p):
        p.add_argument("--config", help="key = value config file (defaults apply if omitted)")

    p_run = sub.add_parser("run", help="integrate one configuration, write series + snapshots")
    add_config(p_run)
    p_run.add_argument("--out", help="output directory (default from config, else '.')")
    p_run.set_defaults(func=cmd_run)

    p_check = sub.add_parser("check", help="evaluate the stability conditions")
    add_config(p_check)
    p_check.add_argument(
        "--require",
        choices=("mpp", "es", "both", "none"),
        default="mpp",
        help="guarantee that must hold for exit code 0 (default: mpp)",
    )
    p_check.set_defaults(func=cmd_check)

    p_norm = sub.add_parser("norm", help="print the long-range operator max-norm")
    add_config(p_norm)
    p_norm.set_defaults(func=cmd_norm)

    p_energy = sub.add_parser("energy", help="print the energy breakdown of a snapshot")
    add_config(p_energy)
    p_energy.add_argument("--snapshot", required=True, help="snapshot file to evaluate")
    p_energy.set_defaults(func=cmd_energy)

    p_conv = sub.add_parser("converge", help="temporal convergence-rate study")
    p_conv.add_argument("--scale", choices=("desk", "paper"), default="desk")
    p_conv.add_argument("--out", help="directory for rates.csv")
    p_conv.add_argument("--n", type=int, default=128, help="grid size per axis (with --eps-factors)")
    p_conv.add_argument("--levels", type=int, default=5, help="number of halved steps (with --eps-factors)")
    p_conv.add_argument("--base-tau", type=float, default=1e-4, help="largest step (with --eps-factors)")
    p_conv.add_argument("--bench-tau", type=float, default=4e-6, help="benchmark step (with --eps-factors)")
    p_conv.add_argument("--t-end", type=float, default=0.02, help="horizon (with --eps-factors)")
    p_conv.add_argument(
        "--eps-factors",
        help="comma list of interface widths in grid spacings; overrides --scale",
    )
    p_conv.set_defaults(func=cmd_converge)

    p_coarsen = sub.add_parser("coarsen", help="coarsening run from random initial data")
    p_coarsen.add_argument("--dim", type=int, choices=(1, 2), required=True)
    p_coarsen.add_argument(
        "--preset", choices=("g500", "g2000", "g1000_2d", "g2000_2d"), required=True
    )
    p_coarsen.add_argument("--scale", choices=("desk", "paper"), default="desk")
    p_coarsen.add_argument("--seed", type=int, default=0)
    p_coarsen.add_argument("--out", help="output directory for series + snapshots")
    p_coarsen.set_defaults(func=cmd_coarsen)

    p_pvism = sub.add_parser("pvism", help="solvation equilibrium, cubic vs linear indicator")
    p_pvism.add_argument("--scale", choices=("desk", "paper"), default="desk",
                         help="accepted for interface uniformity; both scales run N=1024")
    p_pvism.add_argument("--tau", type=float, default=1e-4)
    p_pvism.add_argument("--t-max", type=float, default=100.0)
    p_pvism.add_argument("--out", help="output directory for equilibria")
    p_pvism.set_defaults(func=cmd_pvism)

    return parser


def main(argv=None) -> int:
    _apply_thread_cap()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PacokError as exc:
        kind = {2: "config", 3: "invariant", 4: "blowup"}.get(
            getattr(exc, "exit_code", 2), "config"
        )
        message = str(exc).replace("\n", " ")
        print(f"error: {kind}: {message}", file=sys.stderr)
        return getattr(exc, "exit_code", 2)


if __name__ == "__main__":
    sys.exit(main())
