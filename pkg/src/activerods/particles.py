"""Monte Carlo oracle: the rod dynamics as an SDE in (y, phi).

    dy = -V(phi) dt + sqrt(2 eps) dW_y      (reflected at y = 0)
    dphi = Phi(phi) dt + sqrt(2 D) dW_phi   (wrapped mod 2 pi)

Randomness is counter-based: every particle owns a substream keyed by
seed XOR (k * stream_stride), and every (step, channel) pair maps to
one 64-bit hash output, so ensembles are bitwise reproducible no matter
how steps are scheduled or partitioned across workers. No generator
state is carried between calls.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coefficients import ModelParams, eval_coeff, sup_abs
from .errors import ConfigurationError, NumericalFailureError
from .grids import PhaseField, PhiGrid, YGrid

_GOLDEN = 0x9E3779B97F4A7C15
_DEFAULT_STRIDE = 0xBF58476D1CE4E5B9   # odd, so substream keys stay distinct
_CHANNELS = 4


@dataclass
class ParticleEnsemble:
    y: np.ndarray
    phi: np.ndarray
    n: int
    seed: int
    stream_stride: int = _DEFAULT_STRIDE
    step: int = 0

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=float)
        self.phi = np.asarray(self.phi, dtype=float)
        if self.y.shape != (self.n,) or self.phi.shape != (self.n,):
            raise ConfigurationError("particle arrays must have shape (n,)")


def _mix64(x: np.ndarray) -> np.ndarray:
    # splitmix64 finalizer, vectorized on uint64 (wraparound is modular)
    x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return x ^ (x >> np.uint64(31))


def _uniforms(seed: int, stride: int, n: int, slot: int,
              channel: int) -> np.ndarray:
    """One independent uniform (0,1) draw per particle for the given
    (step slot, channel) counter."""
    keys = np.uint64(seed % (1 << 64)) ^ (
        np.arange(n, dtype=np.uint64) * np.uint64(stride % (1 << 64)))
    counter = slot * _CHANNELS + channel + 1
    offset = np.uint64((_GOLDEN * counter) % (1 << 64))
    bits = _mix64(keys + offset)
    return ((bits >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0 ** -53


def _normal_pair(seed: int, stride: int, n: int, slot: int):
    """Box-Muller pair of independent standard normals per particle."""
    u1 = _uniforms(seed, stride, n, slot, 0)
    u2 = _uniforms(seed, stride, n, slot, 1)
    r = np.sqrt(-2.0 * np.log(u1))
    theta = 2.0 * np.pi * u2
    return r * np.cos(theta), r * np.sin(theta)


def sample_initial(n: int, seed: int, y_max: float,
                   stream_stride: int = _DEFAULT_STRIDE) -> ParticleEnsemble:
    """Draw the standard initial law: y from the unit-rate exponential
    truncated to [0, y_max] (inverse CDF), phi uniform on [0, 2 pi).
    Uses counter slot 0; dynamics steps start at slot 1."""
    u_y = _uniforms(seed, stream_stride, n, 0, 2)
    u_p = _uniforms(seed, stream_stride, n, 0, 3)
    y = -np.log1p(-u_y * (1.0 - np.exp(-y_max)))
    phi = 2.0 * np.pi * u_p
    return ParticleEnsemble(y=y, phi=phi, n=n, seed=seed,
                            stream_stride=stream_stride, step=0)


def em_step(e: ParticleEnsemble, params: ModelParams, dt: float,
            y_max: float | None = None) -> ParticleEnsemble:
    """One Euler-Maruyama step; reflects at the wall (and at y_max when
    given, matching the zero-flux top face of the grid solvers)."""
    bound = 0.1 / max(sup_abs(params.Phi, 0), sup_abs(params.V, 0))
    if dt > bound * (1.0 + 1e-12):
        raise ConfigurationError(
            f"particle step dt = {dt} exceeds the weak-order bound {bound:.3g}")
    z_y, z_p = _normal_pair(e.seed, e.stream_stride, e.n, e.step + 1)
    V = eval_coeff(params.V, e.phi, 0)
    Phi = eval_coeff(params.Phi, e.phi, 0)
    y = e.y - V * dt + np.sqrt(2.0 * params.epsilon * dt) * z_y
    phi = e.phi + Phi * dt + np.sqrt(2.0 * params.D * dt) * z_p
    y = np.abs(y)
    if y_max is not None:
        over = y > y_max
        if np.any(over):
            y[over] = 2.0 * y_max - y[over]
    phi = np.mod(phi, 2.0 * np.pi)
    return ParticleEnsemble(y=y, phi=phi, n=e.n, seed=e.seed,
                            stream_stride=e.stream_stride, step=e.step + 1)


def run_particles(e: ParticleEnsemble, params: ModelParams, dt: float,
                  t_final: float, y_max: float | None = None) -> ParticleEnsemble:
    """March to t_final with fixed dt (last step shortened to land)."""
    import math
    n_steps = max(1, math.ceil(t_final / dt - 1e-12))
    step_dt = t_final / n_steps
    for _ in range(n_steps):
        e = em_step(e, params, step_dt, y_max=y_max)
    return e


def histogram(e: ParticleEnsemble, y_grid: YGrid,
              phi_grid: PhiGrid) -> PhaseField:
    """Bin particles into the grid cells and normalize to unit mass.

    The angular bin of node j is [phi_j - h/2, phi_j + h/2)."""
    h = phi_grid.h
    shifted = np.mod(e.phi + 0.5 * h, 2.0 * np.pi)
    edges_phi = np.linspace(0.0, 2.0 * np.pi, phi_grid.n_phi + 1)
    counts, _, _ = np.histogram2d(e.y, shifted,
                                  bins=[y_grid.faces, edges_phi])
    total = counts.sum()
    if total == 0:
        raise NumericalFailureError("no particles fell inside the grid")
    vol = y_grid.widths[:, None] * h
    density = counts / (total * vol)
    return PhaseField(density, y_grid, phi_grid)


def tv_distance(h_field: PhaseField, f_field: PhaseField) -> float:
    """Total variation distance between two normalized densities on the
    same grids: half the volume-weighted L1 difference."""
    from .grids import norms
    if h_field.values.shape != f_field.values.shape:
        raise ConfigurationError("histogram and field shapes differ")
    m_h = norms(h_field)["mass"]
    m_f = norms(f_field)["mass"]
    if abs(m_h - m_f) > 1e-6:
        raise NumericalFailureError(
            f"mass mismatch {abs(m_h - m_f):.3e} exceeds 1e-6; "
            "normalize both inputs first")
    vol = h_field.y_grid.widths[:, None] * h_field.phi_grid.h
    return float(0.5 * np.sum(np.abs(h_field.values - f_field.values) * vol))
