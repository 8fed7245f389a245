"""Quantitative acceptance suite.

Fourteen numbered checks, each exercising one guaranteed property of the
package at a pinned configuration and tolerance.  `run_all` returns one
result per check; the CLI's check-all subcommand and the test suite both
render them one line apiece.  Heavy solves are cached so checks sharing
a run do not repeat it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .asymptotics import build_inner
from .coefficients import (AngularCoefficient, ModelParams,
                           epsilon_from_physical, mu0, sup_abs)
from .config import GridSection, RunConfig, bulk_exp_field
from .decomposition import decompose, energy_step
from .errors import ActiveRodsError
from .full_solver import FullSolverConfig, run_full, steady_layer
from .grids import (PhaseField, aggregate_phi, build_phi_grid, build_y_grid,
                    eval_on_nodes, exp_cell_integrals, norms, overlap_average_y)
from .limit_solver import (BulkWallState, LineField, ResolventProblem,
                           build_line_grid, coercivity_gap, manufactured_state,
                           resolvent_solve, run_limit)
from .particles import histogram, run_particles, sample_initial, tv_distance
from .sweep import fit_order, sweep_epsilon, weak_pairing_sweep

_trapz = getattr(np, "trapezoid", None) or np.trapz


@dataclass
class CriterionResult:
    cid: int
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag} {self.cid:02d} {self.name}: {self.detail}"


def _shifted_sine(g0=1.0, a=0.5) -> AngularCoefficient:
    return AngularCoefficient("shifted_sine", {"g0": g0, "a": a})


def _shear(gamma=0.5) -> AngularCoefficient:
    return AngularCoefficient("paper_shear", {"gamma": gamma})


def _const(v) -> AngularCoefficient:
    return AngularCoefficient("constant", {"value": v})


def _base_config(**overrides) -> RunConfig:
    """The conservation-check configuration: graded 256 x 128 grid."""
    kw = dict(epsilon=0.02, D=0.2, T=1.0, V=_shifted_sine(),
              Phi=_shear(0.5),
              grid=GridSection(n_phi=128, n_y=256, y_max=8.0,
                               layer_width="auto", layer_cells=32))
    kw.update(overrides)
    return RunConfig(**kw)


# -- cached heavy runs --------------------------------------------------------


@lru_cache(maxsize=None)
def _sweep_records():
    cfg = _base_config()
    cfg.experiment.epsilon_list = [0.08, 0.04, 0.02, 0.01]
    return tuple(sweep_epsilon(cfg))


@lru_cache(maxsize=None)
def _weak_records():
    cfg = _base_config(D=0.0, dt=0.01)
    cfg.experiment.epsilon_list = [0.08, 0.04, 0.02, 0.01]
    return tuple(weak_pairing_sweep(cfg))


@lru_cache(maxsize=None)
def _d0_run():
    """D = 0 kinetic run decomposed at ten snapshot times."""
    eps = 0.05
    params = ModelParams(epsilon=eps, D=0.0, T=1.0, V=_const(1.0),
                         Phi=_shear(0.5))
    y_grid = build_y_grid(8.0, 128, 8 * eps, 32)
    phi_grid = build_phi_grid(64)
    f0 = bulk_exp_field(y_grid, phi_grid)
    times = [round(0.1 * k, 10) for k in range(1, 11)]
    snaps = run_full(f0, params, FullSolverConfig(dt=0.01), times)
    return params, f0, snaps


@lru_cache(maxsize=None)
def _manufactured_ladder():
    """Limit solves of the closed-form bulk-wall pair at three dyadic
    resolutions; returns (params, levels) with the solved states."""
    params = ModelParams(epsilon=0.05, D=0.5, T=1.0, V=_const(1.0),
                         Phi=_const(0.0), allow_zero_epsilon=False)
    levels = []
    for n_y, n_phi, dt in ((64, 32, 0.05), (128, 64, 0.025),
                           (256, 128, 0.0125)):
        y_grid = build_y_grid(20.0, n_y, 10.0, n_y // 2)   # uniform
        phi_grid = build_phi_grid(n_phi)
        s0 = manufactured_state(0.0, 1.0, 1.0, params.D, y_grid, phi_grid)
        s_T = run_limit(s0, params, FullSolverConfig(dt=dt), [1.0])[-1][1]
        exact = manufactured_state(1.0, 1.0, 1.0, params.D, y_grid, phi_grid)
        levels.append((n_y, n_phi, dt, s0, s_T, exact))
    return params, levels


# -- criteria -----------------------------------------------------------------


def _c1_scale_arithmetic() -> CriterionResult:
    val = epsilon_from_physical(2e3, 3.0, 1e3)
    target = 6.6e-4
    ok = abs(val - target) <= 0.05 * target
    return CriterionResult(1, "scale-parameter-arithmetic", ok,
                           f"eps={val:.6e}, target {target:.1e} +- 5%")


def _c2_conservation() -> CriterionResult:
    cfg = _base_config()
    y_grid, phi_grid = cfg.build_grids()
    f0 = bulk_exp_field(y_grid, phi_grid)
    params = cfg.model_params()
    snaps = run_full(f0, params, cfg.solver_config(), [cfg.T])
    m0 = norms(f0)["mass"]
    mT = norms(snaps[-1][1])["mass"]
    drift = abs(mT - m0) / abs(m0)
    ok = drift <= 1e-8
    return CriterionResult(2, "kinetic-mass-conservation", ok,
                           f"relative drift {drift:.3e} (tol 1e-08)")


def _c3_steady_layer() -> CriterionResult:
    eps = 0.05
    params = ModelParams(epsilon=eps, D=0.5, T=1.0, V=_const(1.0),
                         Phi=_const(0.0))
    y_grid = build_y_grid(4.0, 128, 18 * eps, 72)
    phi_grid = build_phi_grid(16)
    f0 = steady_layer(params.V, eps, y_grid, phi_grid)
    f_T = run_full(f0, params, FullSolverConfig(), [1.0])[-1][1]
    diff = PhaseField(f_T.values - f0.values, y_grid, phi_grid)
    dev = norms(diff)["l1"]
    ok = dev <= 1e-6
    return CriterionResult(3, "steady-layer-stationarity", ok,
                           f"L1 deviation {dev:.3e} at T=1 (tol 1e-06)")


def _c4_rotating_layer() -> CriterionResult:
    eps = 0.05
    T = 0.5
    params = ModelParams(epsilon=eps, D=0.0, T=T, V=_const(1.0),
                         Phi=_const(1.0))
    y_grid = build_y_grid(4.0, 96, 16 * eps, 64)
    errs = []
    h_list = []
    for k, n_phi in enumerate((32, 64, 128, 256)):
        phi_grid = build_phi_grid(n_phi)
        dt = T / (4 * 2 ** k)
        layer = steady_layer(params.V, eps, y_grid, phi_grid)
        prof0 = (1.0 + 0.5 * np.sin(phi_grid.nodes)) / (2.0 * np.pi)
        f0 = PhaseField(layer.values * prof0[None, :], y_grid, phi_grid)
        f_T = run_full(f0, params, FullSolverConfig(dt=dt), [T])[-1][1]
        profT = (1.0 + 0.5 * np.sin(phi_grid.nodes - T)) / (2.0 * np.pi)
        exact = layer.values * profT[None, :]
        diff = PhaseField(f_T.values - exact, y_grid, phi_grid)
        errs.append(norms(diff)["l1"])
        h_list.append(phi_grid.h)
    slope = float(np.polyfit(np.log(h_list), np.log(errs), 1)[0])
    ok = 0.8 <= slope <= 1.2
    err_txt = ">".join(f"{e:.2e}" for e in errs)
    return CriterionResult(4, "rotating-layer-order", ok,
                           f"fitted order {slope:.3f} in [0.8,1.2], "
                           f"L1 errors {err_txt}")


def _c5_manufactured() -> CriterionResult:
    _, levels = _manufactured_ladder()
    errs = []
    drifts = []
    for n_y, n_phi, dt, s0, s_T, exact in levels:
        e_bulk = float(np.max(np.abs(s_T.bulk.values - exact.bulk.values)))
        e_wall = float(np.max(np.abs(s_T.wall - exact.wall)))
        errs.append(max(e_bulk, e_wall))
        m0 = s0.combined_mass()
        drifts.append(abs(s_T.combined_mass() - m0) / abs(m0))
    ratios = [errs[k + 1] / errs[k] for k in range(len(errs) - 1)]
    ok_rate = all(0.4 <= r <= 0.6 for r in ratios)
    ok_mass = all(d <= 1e-10 for d in drifts)
    ratio_txt = ",".join(f"{r:.3f}" for r in ratios)
    return CriterionResult(5, "limit-manufactured-convergence",
                           ok_rate and ok_mass,
                           f"Linf ratios [{ratio_txt}] in [0.4,0.6], "
                           f"max mass drift {max(drifts):.2e} (tol 1e-10)")


def _c6_composite_error() -> CriterionResult:
    recs = _sweep_records()
    errs = [r.l1_error for r in recs]
    decreasing = all(b < a for a, b in zip(errs, errs[1:]))
    order = fit_order(list(recs))
    ok = decreasing and order >= 0.7
    err_txt = ">".join(f"{e:.2e}" for e in errs)
    return CriterionResult(6, "composite-error-decay", ok,
                           f"l1_error {err_txt}, fitted order {order:.3f} "
                           f"(need decreasing, >=0.7)")


def _c7_residual_scaling() -> CriterionResult:
    recs = _sweep_records()
    eps = np.array([r.epsilon for r in recs])
    tot = np.array([r.l1_R + r.l1_r for r in recs])
    slope = float(np.polyfit(np.log(eps), np.log(tot), 1)[0])
    ok = 0.75 <= slope <= 1.25
    return CriterionResult(7, "residual-epsilon-scaling", ok,
                           f"slope {slope:.3f} in [0.75,1.25]")


def _c8_orthogonality() -> CriterionResult:
    params, f0, snaps = _d0_run()
    eps = params.epsilon
    worst = 0.0
    for _, f in snaps:
        dec = decompose(f, params.V, eps)
        V_nodes = eval_on_nodes(params.V, f.phi_grid)
        I = exp_cell_integrals(V_nodes, eps, f.y_grid.faces)
        defect = float(np.max(np.abs(np.sum(dec.u.values * I, axis=0))))
        scale = norms(f)["l1"]
        worst = max(worst, defect / scale)
    ok = worst <= 1e-8
    return CriterionResult(8, "layer-mode-orthogonality", ok,
                           f"max relative defect {worst:.3e} over "
                           f"{len(snaps)} snapshots (tol 1e-08)")


def _c9_energy_bound() -> CriterionResult:
    params, f0, snaps = _d0_run()
    C = sup_abs(params.Phi, 1) + 2.0 * sup_abs(params.V, 0) + 2.0
    dec0 = decompose(f0, params.V, params.epsilon)
    E0, diss0 = energy_step(dec0, params.V)
    times = [0.0]
    energies = [E0]
    diss = [diss0]
    for t, f in snaps:
        d = decompose(f, params.V, params.epsilon)
        E, dd = energy_step(d, params.V)
        times.append(t)
        energies.append(E)
        diss.append(dd)
    ok = True
    worst = -np.inf
    for k in range(1, len(times)):
        integral = float(_trapz(diss[:k + 1], times[:k + 1]))
        lhs = energies[k] + integral
        rhs = E0 * math.exp(C * times[k])
        worst = max(worst, lhs / rhs)
        if lhs > rhs:
            ok = False
    return CriterionResult(9, "energy-gronwall-bound", ok,
                           f"max (E+int diss)/(E0 e^Ct) = {worst:.3f} "
                           f"with C={C:.2f} (need <= 1)")


def _c10_weak_pairings() -> CriterionResult:
    recs = _weak_records()
    by_test = {}
    for r in recs:
        by_test.setdefault(r.test, []).append(r)
    ok = True
    parts = []
    for name, rows in by_test.items():
        rows.sort(key=lambda r: -r.epsilon)
        diffs = [r.abs_diff for r in rows]
        mono = all(b < a for a, b in zip(diffs, diffs[1:]))
        ok = ok and mono
        parts.append(f"{name}:{'dec' if mono else 'NOT-dec'}"
                     f"({diffs[0]:.1e}->{diffs[-1]:.1e})")
    return CriterionResult(10, "weak-pairing-convergence", ok,
                           "; ".join(parts))


def coercivity_samples(params: ModelParams, lam: float,
                       resolutions=((301, 32), (601, 48)),
                       per_res: int = 10, seed: int = 1234,
                       y_half: float = 8.0) -> list:
    """Gap of the accretivity inequality for random band-limited fields
    u = exp(-(y/sigma)^2) * (trig polynomial of degree <= 6).
    Returns (n_y, n_phi, gap) triples."""
    rng = np.random.default_rng(seed)
    out = []
    for n_y, n_phi in resolutions:
        grid = build_line_grid(y_half, n_y)
        phi_grid = build_phi_grid(n_phi)
        for _ in range(per_res):
            sigma = rng.uniform(0.8, 2.0)
            prof = np.exp(-(grid.nodes / sigma) ** 2)
            ang = np.full(phi_grid.n_phi, rng.normal())
            for k in range(1, 7):
                ang = ang + rng.normal() * np.cos(k * phi_grid.nodes) \
                          + rng.normal() * np.sin(k * phi_grid.nodes)
            u = LineField(prof[:, None] * ang[None, :], grid, phi_grid)
            out.append((n_y, n_phi, coercivity_gap(u, lam, params)))
    return out


def resolvent_ratios(params: ModelParams, lam: float,
                     regs=(1e-1, 1e-2, 1e-3), y_half: float = 12.0,
                     n_y: int = 481, n_phi: int = 32) -> list:
    """Stability ratio of the regularized resolvent solve for a fixed
    smooth right-hand side, one entry per regularization strength."""
    grid = build_line_grid(y_half, n_y)
    phi_grid = build_phi_grid(n_phi)
    prof = np.exp(-grid.nodes ** 2)
    ang = 1.0 + np.cos(phi_grid.nodes) + 0.5 * np.sin(2 * phi_grid.nodes)
    rhs = LineField(prof[:, None] * ang[None, :], grid, phi_grid)
    out = []
    for eps_reg in regs:
        sol = resolvent_solve(ResolventProblem(eps_reg=eps_reg, lam=lam,
                                               rhs=rhs), params)
        out.append((eps_reg, sol.ratio))
    return out


def _c11_coercivity() -> CriterionResult:
    params = ModelParams(epsilon=0.05, D=0.5, T=1.0, V=_shifted_sine(),
                         Phi=_shear(1.0))
    lam = mu0(params.Phi) + 1.0
    samples = coercivity_samples(params, lam)
    worst = min(g for _, _, g in samples)
    ok = worst >= -1e-8
    return CriterionResult(11, "coercivity-gap", ok,
                           f"min gap {worst:.3e} over {len(samples)} fields "
                           f"(tol -1e-08)")


def _c12_resolvent() -> CriterionResult:
    params = ModelParams(epsilon=0.05, D=0.5, T=1.0, V=_shifted_sine(),
                         Phi=_shear(1.0))
    lam = mu0(params.Phi) + 1.0
    pairs = resolvent_ratios(params, lam)
    ratios = [r for _, r in pairs]
    spread = max(ratios) / min(ratios)
    ok = spread < 2.0
    ratio_txt = ",".join(f"{r:.3f}" for r in ratios)
    return CriterionResult(12, "resolvent-uniformity", ok,
                           f"ratios [{ratio_txt}], spread {spread:.3f} "
                           f"(need < 2)")


def _c13_particle_oracle() -> CriterionResult:
    eps = 0.05
    T = 0.5
    params = ModelParams(epsilon=eps, D=0.2, T=T, V=_shifted_sine(),
                         Phi=_shear(0.5))
    y_max = 8.0
    fine_y = build_y_grid(y_max, 256, 8 * eps, 32)
    fine_phi = build_phi_grid(128)
    f0 = bulk_exp_field(fine_y, fine_phi)
    f_T = run_full(f0, params, FullSolverConfig(), [T])[-1][1]

    coarse_y = build_y_grid(y_max, 64, 8 * eps, 32)
    coarse_phi = build_phi_grid(32)
    vals = aggregate_phi(f_T.values, 4)
    vals = overlap_average_y(fine_y.faces, vals, coarse_y.faces)
    pde = PhaseField(vals, coarse_y, coarse_phi)
    pde = PhaseField(pde.values / norms(pde)["mass"], coarse_y, coarse_phi)

    ens = sample_initial(1_000_000, 20240817, y_max)
    ens = run_particles(ens, params, 1e-3, T, y_max=y_max)
    hist = histogram(ens, coarse_y, coarse_phi)
    tv = tv_distance(hist, pde)
    ok = tv <= 0.05
    return CriterionResult(13, "particle-histogram-agreement", ok,
                           f"TV distance {tv:.4f} at T={T} (tol 0.05)")


def _c14_compatibility() -> CriterionResult:
    params, levels = _manufactured_ladder()
    l1s = []
    for n_y, n_phi, dt, s0, s_T, exact in levels:
        inner = build_inner(s_T, params)
        h_phi = s_T.bulk.phi_grid.h
        l1s.append(float(np.sum(np.abs(inner.compat_residual)) * h_phi))
    ratios = [l1s[k] / l1s[k + 1] for k in range(len(l1s) - 1)]
    ok = all(1.4 <= r <= 2.6 for r in ratios)
    ratio_txt = ",".join(f"{r:.3f}" for r in ratios)
    return CriterionResult(14, "compatibility-defect-halving", ok,
                           f"compat L1 halving ratios [{ratio_txt}] "
                           f"in [1.4,2.6]")


_CRITERIA = (
    _c1_scale_arithmetic,
    _c2_conservation,
    _c3_steady_layer,
    _c4_rotating_layer,
    _c5_manufactured,
    _c6_composite_error,
    _c7_residual_scaling,
    _c8_orthogonality,
    _c9_energy_bound,
    _c10_weak_pairings,
    _c11_coercivity,
    _c12_resolvent,
    _c13_particle_oracle,
    _c14_compatibility,
)


def run_criterion(cid: int) -> CriterionResult:
    if not 1 <= cid <= len(_CRITERIA):
        raise ValueError(f"no criterion {cid}")
    fn = _CRITERIA[cid - 1]
    try:
        return fn()
    except ActiveRodsError as exc:
        name = fn.__name__.split("_", 2)[-1].replace("_", "-")
        return CriterionResult(cid, name, False,
                               f"raised {type(exc).__name__}: {exc}")


def run_all() -> list:
    return [run_criterion(cid) for cid in range(1, len(_CRITERIA) + 1)]
