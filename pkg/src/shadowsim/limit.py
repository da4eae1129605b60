"""Reaction-diffusion-ODE solver and the large-diffusion convergence harness.

The system ``u_t = f(u, v)``, ``v_t = D v_xx + g(u, v)`` with zero-flux
boundaries is discretized in space on the same cell-centred grid as the
shadow system.  Time stepping is the IMEX Runge-Kutta scheme ARS(4,4,3):
diffusion is implicit, reactions explicit.  Each implicit stage is a
tridiagonal solve, so large ``D`` costs no stability restriction, and as
``D -> infinity`` the scheme reduces to its explicit part applied to the
shadow system (``v`` collapses to its mean at every stage).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .errors import AlignmentError, InvalidInputError, StepOverflow
from .grid import ShadowState, SpatialGrid, check_field
from .integrator import IntegratorConfig, run_shadow

__all__ = [
    "RDState",
    "RDTrajectory",
    "LimitStudy",
    "neumann_laplacian",
    "run_rdode",
    "convergence_metric",
    "convergence_study",
    "limit_sample_times",
]

# ARS(4,4,3): stage k uses explicit row _AE[k-1] on F(Y_0..Y_{k-1}) and
# implicit row _AI[k-1] on L(Y_1..Y_k).  The last stage is the new state.
_GAMMA = 0.5
_AE = (
    (1 / 2,),
    (11 / 18, 1 / 18),
    (5 / 6, -5 / 6, 1 / 2),
    (1 / 4, 7 / 4, 3 / 4, -7 / 4),
)
_AI = (
    (1 / 2,),
    (1 / 6, 1 / 2),
    (-1 / 2, 1 / 2, 1 / 2),
    (3 / 2, -3 / 2, 1 / 2, 1 / 2),
)


@dataclass(frozen=True)
class RDState:
    u: np.ndarray
    v: np.ndarray
    t: float


@dataclass
class RDTrajectory:
    """Samples of ``(u, v)``; one row per sample time."""

    times: np.ndarray
    u: np.ndarray
    v: np.ndarray
    model: object
    grid: SpatialGrid
    D: float

    def __len__(self):
        return self.times.size

    @property
    def samples(self) -> list[RDState]:
        return [RDState(self.u[k], self.v[k], float(self.times[k])) for k in range(len(self))]


def neumann_laplacian(grid: SpatialGrid, f, D: float = 1.0) -> np.ndarray:
    """``D`` times the 3-point Laplacian with reflecting ghost cells.

    The discrete operator is symmetric and its columns sum to zero, so the
    quadrature of the result vanishes (no flux through the boundary).
    """
    f = check_field(grid, f)
    out = np.empty_like(f)
    out[1:-1] = f[:-2] - 2.0 * f[1:-1] + f[2:]
    out[0] = f[1] - f[0]
    out[-1] = f[-2] - f[-1]
    return D * out / grid.h**2


class _ImplicitDiffusion:
    """Solver for ``(I - c Lap) v = r`` that keeps the mean exact.

    The operator fixes constants, so the mean of ``v`` equals the mean of
    ``r``; only the mean-free part is passed through the banded solve.  This
    keeps the result accurate when ``c`` is huge.
    """

    def __init__(self, grid, coef):
        n = grid.n_cells
        k = coef / grid.h**2
        ab = np.zeros((3, n))
        ab[0, 1:] = -k
        ab[2, :-1] = -k
        ab[1, :] = 1.0 + 2.0 * k
        ab[1, 0] = ab[1, -1] = 1.0 + k
        self.ab = ab
        self.w = grid.weights

    def __call__(self, r):
        mean = self.w @ r
        z = solve_banded((1, 1), self.ab, r - mean, check_finite=False)
        return mean + (z - self.w @ z)


def _ars_step(model, grid, u, v, dt, D, solver):
    n_stage = len(_AE)
    Fu, Fv, Lv = [], [], []
    Yu, Yv = u, v
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        Fu.append(model.f(Yu, Yv))
        Fv.append(model.g(Yu, Yv))
        for k in range(n_stage):
            ru = u + dt * sum(a * F for a, F in zip(_AE[k], Fu))
            rv = v + dt * sum(a * F for a, F in zip(_AE[k], Fv))
            rv = rv + dt * sum(a * L for a, L in zip(_AI[k][:-1], Lv))
            Yu = ru
            if D > 0:
                Yv = solver(rv)
                # L(Y_k) from the stage equation; avoids applying D*Lap
                Lv.append((Yv - rv) / (dt * _GAMMA))
            else:
                Yv = rv
                Lv.append(np.zeros_like(rv))
            if k < n_stage - 1:
                Fu.append(model.f(Yu, Yv))
                Fv.append(model.g(Yu, Yv))
    if not (np.all(np.isfinite(Yu)) and np.all(np.isfinite(Yv))):
        raise StepOverflow("non-finite values in IMEX step")
    return Yu, Yv


def run_rdode(model, grid: SpatialGrid, u0, v0, D: float, cfg: IntegratorConfig) -> RDTrajectory:
    """Integrate the reaction-diffusion-ODE system up to ``cfg.t_end``.

    Steps have size at most ``cfg.dt_init`` and land exactly on every sample
    time.  A step producing non-finite values is retried with half the size;
    below ``cfg.dt_min`` a :class:`StepOverflow` is raised.
    """
    u = check_field(grid, u0).copy()
    v = check_field(grid, v0).copy()
    if D < 0:
        raise InvalidInputError("D must be nonnegative")
    if getattr(model, "nonnegative", False) and (np.any(u < 0) or np.any(v < 0)):
        raise InvalidInputError("initial data must be nonnegative")
    schedule = cfg.schedule()
    solvers = {}
    t = 0.0
    times, us, vs = [], [], []
    if schedule[0] <= 0:
        times.append(0.0)
        us.append(u.copy())
        vs.append(v.copy())
        schedule = schedule[1:]
    dt_max = cfg.dt_init
    for target in schedule:
        while t < target:
            remaining = target - t
            m = int(np.ceil(remaining / dt_max - 1e-9))
            h = remaining / max(m, 1)
            if h not in solvers:
                if len(solvers) > 64:
                    solvers.clear()
                solvers[h] = _ImplicitDiffusion(grid, _GAMMA * h * D)
            try:
                u, v = _ars_step(model, grid, u, v, h, D, solvers[h])
            except StepOverflow:
                dt_max = 0.5 * h
                if dt_max < cfg.dt_min:
                    raise
                continue
            t = target if m <= 1 else t + h
        times.append(float(target))
        us.append(u.copy())
        vs.append(v.copy())
    return RDTrajectory(np.asarray(times), np.asarray(us), np.asarray(vs), model, grid, float(D))


def convergence_metric(rd_traj: RDTrajectory, shadow_traj, alpha: float) -> float:
    """``max_k t_k^alpha (|u^D - u|_inf + |v^D - xi|_inf)`` over common samples."""
    t_rd, t_sh = np.asarray(rd_traj.times), np.asarray(shadow_traj.times)
    if t_rd.shape != t_sh.shape or not np.allclose(t_rd, t_sh, rtol=1e-12, atol=1e-15):
        raise AlignmentError("trajectories are not sampled at the same times")
    if rd_traj.u.shape != shadow_traj.u.shape:
        raise AlignmentError("trajectories live on different grids")
    if t_rd.size == 0:
        return 0.0
    du = np.max(np.abs(rd_traj.u - shadow_traj.u), axis=1)
    dv = np.max(np.abs(rd_traj.v - np.asarray(shadow_traj.xi)[:, None]), axis=1)
    return float(np.max(t_rd**alpha * (du + dv)))


def limit_sample_times(T: float, count: int = 100) -> np.ndarray:
    """``T/1000`` followed by ``count`` equispaced times up to ``T``."""
    return np.concatenate([[T / 1000.0], T * np.arange(1, count + 1) / count])


@dataclass
class LimitStudy:
    """Metric per diffusivity and the fitted exponent of ``metric ~ D^slope``.

    ``sup_bound`` holds ``max_t (|u^D|_inf + |v^D|_inf)`` per ``D``; a
    convergence statement needs it bounded uniformly in ``D``.
    """

    D: np.ndarray
    metric: np.ndarray
    slope: float | None
    alpha: float
    xi0: float
    sup_bound: dict = field(default_factory=dict)
    shadow: object = None

    @property
    def table(self):
        return list(zip(self.D.tolist(), self.metric.tolist()))

    @property
    def strictly_decreasing(self) -> bool:
        return bool(np.all(np.diff(self.metric) < 0))


def convergence_study(model, grid: SpatialGrid, u0, v0, D_list, alpha: float = 0.25, T: float = 2.0, *,
                      dt: float = 5e-4, sample_times=None, rel_tol: float = 1e-10) -> LimitStudy:
    """Compare RD-ODE runs at each ``D`` with the shadow run from ``xi0 = Q(v0)``."""
    D_arr = np.asarray(D_list, dtype=float)
    if D_arr.ndim != 1 or np.any(D_arr <= 0) or np.any(np.diff(D_arr) <= 0):
        raise InvalidInputError("D_list must be positive and strictly increasing")
    if not 0 < alpha < 0.5:
        raise InvalidInputError("alpha must lie in (0, 1/2)")
    u0 = check_field(grid, u0)
    v0 = check_field(grid, v0)
    times = limit_sample_times(T) if sample_times is None else np.asarray(sample_times, dtype=float)
    xi0 = float(grid.weights @ v0)
    cfg_sh = IntegratorConfig(t_end=T, dt_init=min(dt, times[0]), dt_min=1e-14, rel_tol=rel_tol,
                              sample_times=tuple(times))
    shadow, report = run_shadow(model, grid, u0, xi0, cfg_sh)
    if report.status != "completed":
        raise StepOverflow(f"shadow reference run ended with status {report.status}")
    cfg_rd = IntegratorConfig(t_end=T, dt_init=dt, dt_min=dt * 1e-6, sample_times=tuple(times))
    metrics, bounds = [], {}
    for D in D_arr:
        rd = run_rdode(model, grid, u0, v0, D, cfg_rd)
        metrics.append(convergence_metric(rd, shadow, alpha))
        bounds[float(D)] = float(np.max(np.abs(rd.u).max(axis=1) + np.abs(rd.v).max(axis=1)))
    metrics = np.asarray(metrics)
    slope = None
    if D_arr.size >= 2 and np.all(metrics > 0):
        slope = float(np.polyfit(np.log(D_arr), np.log(metrics), 1)[0])
    return LimitStudy(D_arr, metrics, slope, alpha, xi0, bounds, shadow)
