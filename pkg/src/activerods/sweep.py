"""Scale-parameter sweeps: solve the kinetic model over a ladder of
epsilon values, compare against composite approximations built from the
limiting system, and fit the observed convergence order.

Per ladder row the limiting system is re-solved on the row's own grid
with the row's own time step, so the discretization bias shared by the
two solves cancels in the difference and the O(epsilon) gap survives
down to small epsilon.  A single fine uniform-grid limit solve supplies
the smooth data for the layer corrector and the residual report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .asymptotics import (build_inner, composite_refined, composite_simple,
                          residual_report)
from .config import RunConfig
from .decomposition import decompose, default_tests, weak_pairings
from .errors import ConfigurationError, FitError
from .full_solver import run_full
from .grids import (build_phi_grid, build_y_grid, eval_on_nodes, norms,
                    PhaseField)
from .limit_solver import run_limit

SWEEP_COLUMNS = ("epsilon", "t_final", "l1_error", "l1_error_refined",
                 "l1_R", "l1_r", "mass_full", "mass_limit_combined",
                 "order_vs_prev")

WEAK_COLUMNS = ("epsilon", "test", "pairing_full", "pairing_limit",
                "abs_diff")


@dataclass
class SweepRecord:
    epsilon: float
    t_final: float
    l1_error: float
    l1_error_refined: float
    l1_R: float
    l1_r: float
    mass_full: float
    mass_limit_combined: float
    order_vs_prev: float

    def row(self):
        return tuple(getattr(self, c) for c in SWEEP_COLUMNS)


@dataclass
class WeakPairingRecord:
    epsilon: float
    test: str
    pairing_full: float
    pairing_limit: float
    abs_diff: float

    def row(self):
        return tuple(getattr(self, c) for c in WEAK_COLUMNS)


def _check_ladder(eps_list) -> list:
    eps = [float(e) for e in eps_list]
    if len(eps) == 0:
        raise ConfigurationError("epsilon_list is empty")
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise ConfigurationError("epsilon_list must be strictly decreasing")
    return eps


def reference_limit_state(cfg: RunConfig, n_y: int | None = None):
    """Limiting system solved to T on a fine uniform y grid (same angular
    resolution as the sweep rows)."""
    n = int(n_y) if n_y is not None else max(2 * cfg.grid.n_y, 512)
    if n % 2:
        n += 1
    y_grid = build_y_grid(cfg.grid.y_max, n, cfg.grid.y_max / 2.0, n // 2)
    phi_grid = build_phi_grid(cfg.grid.n_phi)
    s0 = cfg.initial_limit_state(y_grid, phi_grid)
    snaps = run_limit(s0, cfg.model_params(), cfg.solver_config(), [cfg.T])
    return snaps[-1][1]


def sweep_epsilon(cfg: RunConfig, reference_n_y: int | None = None) -> list:
    """One SweepRecord per epsilon in cfg.experiment.epsilon_list."""
    eps_list = _check_ladder(cfg.experiment.epsilon_list)
    scfg = cfg.solver_config()

    ref_state = reference_limit_state(cfg, reference_n_y)
    inner_ref = build_inner(ref_state, cfg.model_params())

    records = []
    prev_err = None
    for eps in eps_list:
        y_grid, phi_grid = cfg.build_grids(eps)
        params = cfg.model_params(epsilon=eps)

        f0 = cfg.initial_field(y_grid, phi_grid, eps)
        f_T = run_full(f0, params, scfg, [cfg.T])[-1][1]

        s0 = cfg.initial_limit_state(y_grid, phi_grid)
        s_T = run_limit(s0, params, scfg, [cfg.T])[-1][1]

        f_bar = composite_simple(s_T, eps, cfg.V)
        f_hat = composite_refined(s_T, inner_ref, eps, cfg.V)

        diff_bar = PhaseField(f_T.values - f_bar.values, y_grid, phi_grid)
        diff_hat = PhaseField(f_T.values - f_hat.values, y_grid, phi_grid)
        err = norms(diff_bar)["l1"]
        err_hat = norms(diff_hat)["l1"]

        resid = residual_report(ref_state, inner_ref, params,
                                eval_y_grid=y_grid)

        order = float("nan") if prev_err is None else \
            math.log2(prev_err / err) if err > 0 and prev_err > 0 else \
            float("nan")
        records.append(SweepRecord(
            epsilon=eps, t_final=cfg.T, l1_error=err,
            l1_error_refined=err_hat, l1_R=resid.l1_R, l1_r=resid.l1_r,
            mass_full=norms(f_T)["mass"],
            mass_limit_combined=s_T.combined_mass(),
            order_vs_prev=order))
        prev_err = err
    return records


def fit_order(records, column: str = "l1_error") -> float:
    """Least-squares slope of log error against log epsilon.

    Requires at least three records on a dyadic epsilon ladder with
    positive errors; anything else raises FitError.
    """
    if len(records) < 3:
        raise FitError("order fit needs at least 3 sweep records")
    eps = np.array([r.epsilon for r in records], dtype=float)
    errs = np.array([getattr(r, column) for r in records], dtype=float)
    ratios = eps[:-1] / eps[1:]
    if np.any(np.abs(ratios - 2.0) > 0.05 * 2.0):
        raise FitError("order fit needs a dyadic epsilon ladder")
    if np.any(errs < 0) or not np.all(np.isfinite(errs)):
        raise FitError("order fit needs finite nonnegative errors")
    if np.all(errs == 0):
        return 0.0
    if np.any(errs <= 0):
        raise FitError("order fit needs strictly positive errors")
    spread = errs.max() / errs.min()
    if spread < 1.0 + 1e-12:
        return 0.0
    slope = np.polyfit(np.log(eps), np.log(errs), 1)[0]
    return float(slope)


def weak_pairing_sweep(cfg: RunConfig) -> list:
    """Wall-trace weak pairings: kinetic solve vs matched limit solve.

    Only defined for D = 0, where the decomposition's boundary profile
    has an exact counterpart in the limiting wall density.
    """
    if cfg.D != 0.0:
        raise ConfigurationError("weak pairing sweep requires D = 0")
    eps_list = _check_ladder(cfg.experiment.epsilon_list)
    scfg = cfg.solver_config()

    records = []
    for eps in eps_list:
        y_grid, phi_grid = cfg.build_grids(eps)
        params = cfg.model_params(epsilon=eps)
        V_nodes = eval_on_nodes(cfg.V, phi_grid)

        f0 = cfg.initial_field(y_grid, phi_grid, eps)
        f_T = run_full(f0, params, scfg, [cfg.T])[-1][1]
        dec = decompose(f_T, cfg.V, eps)

        s0 = cfg.initial_limit_state(y_grid, phi_grid)
        s_T = run_limit(s0, params, scfg, [cfg.T])[-1][1]
        m_limit = V_nodes * s_T.wall

        tests = default_tests(phi_grid)
        pair_full = weak_pairings(dec, tests)
        for (name, tvals), pf in zip(tests, pair_full):
            pl = float(np.sum(m_limit * tvals) * phi_grid.h)
            records.append(WeakPairingRecord(
                epsilon=eps, test=name, pairing_full=pf,
                pairing_limit=pl, abs_diff=abs(pf - pl)))
    return records
