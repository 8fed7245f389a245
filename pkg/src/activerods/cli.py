"""Command-line interface.

Subcommands:

    run-full         integrate the kinetic model, dump field snapshots
    run-limit        integrate the coupled bulk-wall limiting system
    composite        limit solve + matched-layer reconstruction + residuals
    sweep            epsilon ladder with composite errors and fitted order
    decompose        D=0 run split into wall mode and orthogonal remainder
    particles        stochastic ensemble histogram
    check-coercivity accretivity gap battery for the model's coefficients
    check-resolvent  regularized resolvent stability ratios
    check-all        the full acceptance suite, one line per criterion

Exit codes: 0 success, 1 failed check, 2 configuration problem,
3 violated model assumption, 4 numerical failure.  The output directory
comes from the config's [output] section, overridden by the
ACTIVERODS_OUT_DIR environment variable, overridden by --out.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import acceptance
from .asymptotics import build_inner, composite_refined, composite_simple, \
    residual_report
from .coefficients import mu0
from .config import RunConfig, load_config
from .decomposition import decompose, default_tests, energy_step, weak_pairings
from .errors import ActiveRodsError, ConfigurationError, FitError
from .full_solver import run_full
from .grids import norms
from .limit_solver import run_limit
from .particles import histogram, run_particles, sample_initial
from .reports import field_rows, profile_rows, write_csv
from .sweep import SWEEP_COLUMNS, fit_order, sweep_epsilon


def _out_dir(cfg: RunConfig, args) -> str:
    out = getattr(args, "out", None)
    if out:
        return out
    env = os.environ.get("ACTIVERODS_OUT_DIR")
    if env:
        return env
    return cfg.out_dir


def _wrote(path: str, n_rows: int):
    print(f"wrote {path} ({n_rows} rows)")


def _write(cfg, args, name, header, rows) -> str:
    path = os.path.join(_out_dir(cfg, args), name)
    write_csv(path, header, rows)
    _wrote(path, len(rows))
    return path


# -- subcommands --------------------------------------------------------------


def _cmd_run_full(args) -> int:
    cfg = load_config(args.config)
    y_grid, phi_grid = cfg.build_grids()
    f0 = cfg.initial_field(y_grid, phi_grid)
    snaps = run_full(f0, cfg.model_params(), cfg.solver_config(),
                     cfg.experiment.snapshot_times)
    rows = []
    for t, f in snaps:
        rows.extend(field_rows(t, f))
    _write(cfg, args, "full_snapshots.csv", ("t", "y", "phi", "f"), rows)
    last = snaps[-1][1]
    print(f"final mass {norms(last)['mass']:.12g} at t={snaps[-1][0]:g}")
    return 0


def _cmd_run_limit(args) -> int:
    cfg = load_config(args.config)
    y_grid, phi_grid = cfg.build_grids()
    s0 = cfg.initial_limit_state(y_grid, phi_grid)
    snaps = run_limit(s0, cfg.model_params(), cfg.solver_config(),
                      cfg.experiment.snapshot_times)
    bulk_rows, wall_rows = [], []
    for t, s in snaps:
        bulk_rows.extend(field_rows(t, s.bulk))
        wall_rows.extend(profile_rows(t, phi_grid.nodes, s.wall))
    _write(cfg, args, "limit_bulk.csv", ("t", "y", "phi", "rho_bulk"),
           bulk_rows)
    _write(cfg, args, "limit_wall.csv", ("t", "phi", "rho_wall"), wall_rows)
    print(f"final combined mass {snaps[-1][1].combined_mass():.12g}")
    return 0


def _cmd_composite(args) -> int:
    cfg = load_config(args.config)
    y_grid, phi_grid = cfg.build_grids()
    s0 = cfg.initial_limit_state(y_grid, phi_grid)
    s_T = run_limit(s0, cfg.model_params(), cfg.solver_config(),
                    [cfg.T])[-1][1]
    inner = build_inner(s_T, cfg.model_params())
    f_bar = composite_simple(s_T, cfg.epsilon, cfg.V)
    f_hat = composite_refined(s_T, inner, cfg.epsilon, cfg.V)
    rows = []
    for i in range(y_grid.n_y):
        for j in range(phi_grid.n_phi):
            rows.append((y_grid.centers[i], phi_grid.nodes[j],
                         f_bar.values[i, j], f_hat.values[i, j]))
    _write(cfg, args, "composite.csv", ("y", "phi", "f_bar", "f_hat"), rows)
    resid = residual_report(s_T, inner, cfg.model_params())
    _write(cfg, args, "residual.csv", ("epsilon", "l1_R", "l1_r"),
           [(resid.epsilon, resid.l1_R, resid.l1_r)])
    return 0


def _cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    records = sweep_epsilon(cfg)
    _write(cfg, args, "sweep.csv", SWEEP_COLUMNS,
           [r.row() for r in records])
    try:
        order = fit_order(records)
        print(f"fitted order {order:.4f} over {len(records)} epsilons")
    except FitError as exc:
        print(f"no order fit: {exc}")
    return 0


def _cmd_decompose(args) -> int:
    cfg = load_config(args.config)
    if cfg.D != 0.0:
        raise ConfigurationError(
            "decompose requires D = 0 (set D = 0 in [model])")
    y_grid, phi_grid = cfg.build_grids()
    f0 = cfg.initial_field(y_grid, phi_grid)
    snaps = run_full(f0, cfg.model_params(), cfg.solver_config(),
                     cfg.experiment.snapshot_times)
    mode_rows, energy_rows = [], []
    last_dec = None
    for t, f in snaps:
        dec = decompose(f, cfg.V, cfg.epsilon)
        E, diss = energy_step(dec, cfg.V)
        mode_rows.extend(profile_rows(t, phi_grid.nodes, dec.m))
        energy_rows.append((t, E, diss))
        last_dec = dec
    _write(cfg, args, "modes.csv", ("t", "phi", "m"), mode_rows)
    _write(cfg, args, "energy.csv", ("t", "E", "dissipation"), energy_rows)
    tests = default_tests(phi_grid)
    pair_rows = [(cfg.epsilon, name, val) for (name, _), val in
                 zip(tests, weak_pairings(last_dec, tests))]
    _write(cfg, args, "pairings.csv", ("epsilon", "test", "pairing"),
           pair_rows)
    return 0


def _cmd_particles(args) -> int:
    cfg = load_config(args.config)
    y_grid, phi_grid = cfg.build_grids()
    seed = cfg.experiment.seeds[0]
    ens = sample_initial(cfg.experiment.n_particles, seed, cfg.grid.y_max)
    ens = run_particles(ens, cfg.model_params(), cfg.experiment.particle_dt,
                        cfg.T, y_max=cfg.grid.y_max)
    h = histogram(ens, y_grid, phi_grid)
    rows = []
    for i in range(y_grid.n_y):
        for j in range(phi_grid.n_phi):
            rows.append((y_grid.centers[i], phi_grid.nodes[j],
                         h.values[i, j]))
    _write(cfg, args, "particles.csv", ("y", "phi", "density"), rows)
    print(f"{cfg.experiment.n_particles} particles, seed {seed}, "
          f"T={cfg.T:g}")
    return 0


def _cmd_check_coercivity(args) -> int:
    cfg = load_config(args.config)
    params = cfg.model_params()
    lam = mu0(cfg.Phi) + 1.0
    samples = acceptance.coercivity_samples(params, lam)
    rows = [(k, n_y, n_phi, lam, gap)
            for k, (n_y, n_phi, gap) in enumerate(samples)]
    _write(cfg, args, "coercivity.csv",
           ("sample", "n_y", "n_phi", "lambda", "gap"), rows)
    worst = min(g for _, _, g in samples)
    ok = worst >= -1e-8
    print(f"{'PASS' if ok else 'FAIL'} coercivity: min gap {worst:.3e} "
          f"over {len(samples)} fields (tol -1e-08)")
    return 0 if ok else 1


def _cmd_check_resolvent(args) -> int:
    cfg = load_config(args.config)
    params = cfg.model_params()
    lam = mu0(cfg.Phi) + 1.0
    pairs = acceptance.resolvent_ratios(params, lam)
    _write(cfg, args, "resolvent.csv", ("eps_reg", "ratio"), pairs)
    ratios = [r for _, r in pairs]
    spread = max(ratios) / min(ratios)
    ok = spread < 2.0
    print(f"{'PASS' if ok else 'FAIL'} resolvent: ratio spread "
          f"{spread:.3f} across eps_reg ladder (need < 2)")
    return 0 if ok else 1


def _cmd_check_all(args) -> int:
    results = acceptance.run_all()
    for res in results:
        print(res.line())
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} criteria passed")
    return 1 if failed else 0


# -- parser -------------------------------------------------------------------


def _add_config_cmd(sub, name, fn, helptext):
    p = sub.add_parser(name, help=helptext)
    p.add_argument("--config", required=True, help="path to a run config")
    p.add_argument("--out", default=None,
                   help="output directory (overrides config and environment)")
    p.set_defaults(func=fn)
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="activerods",
        description="Solvers and checks for wall-confined active rod "
                    "kinetics and its thin-layer limit.")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_config_cmd(sub, "run-full", _cmd_run_full,
                    "integrate the kinetic model")
    _add_config_cmd(sub, "run-limit", _cmd_run_limit,
                    "integrate the bulk-wall limiting system")
    _add_config_cmd(sub, "composite", _cmd_composite,
                    "matched-layer reconstruction and residuals")
    _add_config_cmd(sub, "sweep", _cmd_sweep,
                    "epsilon ladder with composite errors")
    _add_config_cmd(sub, "decompose", _cmd_decompose,
                    "wall-mode decomposition along a D=0 run")
    _add_config_cmd(sub, "particles", _cmd_particles,
                    "stochastic ensemble histogram")
    _add_config_cmd(sub, "check-coercivity", _cmd_check_coercivity,
                    "accretivity gap battery")
    _add_config_cmd(sub, "check-resolvent", _cmd_check_resolvent,
                    "resolvent stability ratios")
    p_all = sub.add_parser("check-all", help="run the full acceptance suite")
    p_all.set_defaults(func=_cmd_check_all)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        return args.func(args)
    except ActiveRodsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
