"""Time integration of the shadow system and of the kinetic ODE.

The unknowns are packed into one vector ``y = [u_0, ..., u_{n-1}, xi]``.  The
``u`` part evolves pointwise by ``f(u, xi)`` and ``xi`` by the quadrature of
``g(u, xi)``, so the kinetic ODE is just the one-cell case with weight 1.

Stepping is classical RK4.  In adaptive mode every step is taken twice (one
full step and two half steps); the difference drives the step size and the
two-half-step result is kept.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, SingularKineticsError, StepOverflow
from .grid import ShadowState, SpatialGrid, check_field, redistribute_weights
from .kinetics import ActivatorInhibitor
from .monitors import MonitorRecord, build_monitors

__all__ = [
    "IntegratorConfig",
    "Trajectory",
    "RunReport",
    "step_shadow",
    "run_shadow",
    "run_kinetics",
]

CLAMP_TOL = 1e-12


@dataclass(frozen=True)
class IntegratorConfig:
    """Run controls.

    Parameters
    ----------
    t_end : float
    dt_init, dt_min : float
        Initial and smallest admissible step.
    rel_tol : float
        Relative local error target for the step-doubling estimate.
    blowup_threshold : float
        ``max u`` above which a collapse of ``dt`` is reported as blowup.
    sample_every : float
        Spacing of recorded samples (``t_end`` is always sampled).
    monitors : tuple of str
        Monitor tags evaluated at every sample.
    sample_times : sequence of float, optional
        Explicit sample times, overriding ``sample_every``.
    adaptive : bool
        ``False`` gives plain fixed-step RK4 with step ``dt_init``.
    abs_tol : float
        Floor added to ``|y|`` in the error scale.
    growth_cap : float
        Once ``max u`` passes ``sqrt(blowup_threshold)`` the step is limited to
        ``growth_cap / rate`` where ``rate`` is the relative growth rate of
        ``max u``.
    monitor_tol : float
        Relative slack allowed in monitor inequalities.
    max_steps : int
        Accepted plus rejected steps before giving up with ``step_failure``.
    """

    t_end: float
    dt_init: float = 1e-2
    dt_min: float = 1e-12
    rel_tol: float = 1e-8
    blowup_threshold: float = 1e8
    sample_every: float = 0.1
    monitors: tuple = ()
    sample_times: tuple | None = None
    adaptive: bool = True
    abs_tol: float = 1e-10
    growth_cap: float = 0.1
    monitor_tol: float = 1e-8
    max_steps: int = 10_000_000

    def __post_init__(self):
        for name in ("t_end", "dt_init", "dt_min", "rel_tol", "sample_every"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise InvalidInputError(f"{name} must be positive, got {value!r}")
        if self.dt_min > self.dt_init:
            raise InvalidInputError("dt_min must not exceed dt_init")
        if not self.blowup_threshold > 1:
            raise InvalidInputError("blowup_threshold must exceed 1")
        object.__setattr__(self, "monitors", tuple(self.monitors))
        if self.sample_times is not None:
            times = np.asarray(self.sample_times, dtype=float)
            if times.ndim != 1 or times.size == 0 or np.any(np.diff(times) <= 0):
                raise InvalidInputError("sample_times must be strictly increasing")
            if times[0] < 0 or times[-1] > self.t_end * (1 + 1e-14):
                raise InvalidInputError("sample_times must lie in [0, t_end]")
            object.__setattr__(self, "sample_times", tuple(float(t) for t in times))

    def schedule(self) -> np.ndarray:
        if self.sample_times is not None:
            return np.asarray(self.sample_times)
        k = int(np.floor(self.t_end / self.sample_every + 1e-9))
        times = np.arange(k + 1) * self.sample_every
        times = times[times < self.t_end * (1 - 1e-12)]
        return np.append(times, self.t_end)


@dataclass
class Trajectory:
    """Sampled solution. ``u`` has one row per sample."""

    times: np.ndarray
    u: np.ndarray
    xi: np.ndarray
    model: object
    grid: SpatialGrid | None = None

    def __len__(self):
        return self.times.size

    @property
    def samples(self) -> list[ShadowState]:
        return [ShadowState(self.u[k], float(self.xi[k]), float(self.times[k])) for k in range(len(self))]

    def at(self, t: float) -> ShadowState:
        k = int(np.argmin(np.abs(self.times - t)))
        return ShadowState(self.u[k], float(self.xi[k]), float(self.times[k]))

    @property
    def final(self) -> ShadowState:
        return ShadowState(self.u[-1], float(self.xi[-1]), float(self.times[-1]))


@dataclass
class RunReport:
    """Outcome of a run.

    ``status`` is ``"completed"``, ``"blowup"`` (with ``t_star`` and ``node``)
    or ``"step_failure"`` (with ``t_fail``).
    """

    status: str
    t_star: float | None = None
    node: int | None = None
    t_fail: float | None = None
    monitor_log: list[MonitorRecord] = field(default_factory=list)
    max_u_history: np.ndarray = field(default_factory=lambda: np.empty((0, 2)))
    clamp_count: int = 0
    accepted_steps: int = 0
    rejected_steps: int = 0
    fitted_rates: dict = field(default_factory=dict)
    message: str = ""

    @property
    def violations(self) -> list[MonitorRecord]:
        return [rec for rec in self.monitor_log if not rec.passed]

    @property
    def monitor_clean(self) -> bool:
        return not self.violations


def _rhs(model, weights, n, y):
    u, xi = y[:n], y[n]
    out = np.empty_like(y)
    out[:n] = model.f(u, xi)
    out[n] = weights @ model.g(u, xi)
    return out


def _rk4(model, weights, n, y, dt):
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        try:
            k1 = _rhs(model, weights, n, y)
            k2 = _rhs(model, weights, n, y + 0.5 * dt * k1)
            k3 = _rhs(model, weights, n, y + 0.5 * dt * k2)
            k4 = _rhs(model, weights, n, y + dt * k3)
        except (SingularKineticsError, FloatingPointError, OverflowError) as exc:
            raise StepOverflow(str(exc)) from exc
        y_new = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(y_new)):
        raise StepOverflow(f"non-finite values after step of size {dt:g}")
    return y_new


def step_shadow(model, grid: SpatialGrid, state: ShadowState, dt: float, weights=None) -> ShadowState:
    """One RK4 step of the coupled system.

    ``xi`` is advanced with the quadrature of ``g`` at every stage.  Raises
    :class:`StepOverflow` when the step produces non-finite values.
    """
    if not dt > 0:
        raise InvalidInputError("dt must be positive")
    u = check_field(grid, state.u)
    w = grid.weights if weights is None else np.asarray(weights, dtype=float)
    y = np.append(u, float(state.xi))
    y_new = _rk4(model, w, grid.n_cells, y, dt)
    return ShadowState(y_new[:-1], float(y_new[-1]), state.t + dt)


def _fit_rate(t, values):
    keep = values > 0
    t, values = t[keep], values[keep]
    if t.size < 4:
        return None
    half = t.size // 2
    slope = np.polyfit(t[half:], np.log(values[half:]), 1)[0]
    return float(slope)


def _integrate(model, weights, y0, cfg, monitors, grid):
    """Shared driver for shadow and kinetic runs."""
    n = y0.size - 1
    nonneg = getattr(model, "nonnegative", False)
    positive_xi = isinstance(model, ActivatorInhibitor)
    schedule = cfg.schedule()
    watch = np.sqrt(cfg.blowup_threshold)

    times, us, xis, log = [], [], [], []
    max_hist = []

    def record(t, y, check=True):
        times.append(t)
        us.append(y[:n].copy())
        xis.append(float(y[n]))
        if check:
            for mon in monitors:
                log.extend(mon(t, y[:n], float(y[n])))

    t, y = 0.0, y0.copy()
    dt = cfg.dt_init
    k = 0
    if schedule[0] <= 0.0:
        record(0.0, y)
        k = 1
    max_hist.append((0.0, float(y[:n].max())))

    report = RunReport(status="completed")
    crossing = None
    steps = 0

    while k < schedule.size:
        target = schedule[k]
        remaining = target - t
        h = dt if cfg.adaptive else cfg.dt_init
        umax_i = int(np.argmax(y[:n]))
        umax = y[umax_i]
        if cfg.adaptive and umax >= watch:
            with np.errstate(over="ignore", invalid="ignore"):
                rate = float(model.f(y[umax_i], y[n])) / umax
            if np.isfinite(rate) and rate > 0:
                h = min(h, cfg.growth_cap / rate)
        clipped = h >= remaining or remaining - h < cfg.dt_min
        if clipped:
            h = remaining

        if (h < cfg.dt_min or t + h == t) and not clipped:
            if crossing is not None:
                report.status = "blowup"
                report.t_star, report.node = crossing
            else:
                report.status = "step_failure"
                report.t_fail = t
                report.message = f"step size fell below dt_min={cfg.dt_min:g} at t={t:.12g}"
            break
        steps += 1
        if steps > cfg.max_steps:
            report.status = "step_failure"
            report.t_fail = t
            report.message = "max_steps exceeded"
            break

        try:
            if cfg.adaptive:
                full = _rk4(model, weights, n, y, h)
                mid = _rk4(model, weights, n, y, 0.5 * h)
                y_new = _rk4(model, weights, n, mid, 0.5 * h)
                scale = cfg.abs_tol + np.maximum(np.abs(y_new), np.abs(y))
                err = float(np.max(np.abs(y_new - full) / scale)) / 15.0 / cfg.rel_tol
            else:
                y_new = _rk4(model, weights, n, y, h)
                err = 0.0
        except StepOverflow:
            report.rejected_steps += 1
            if not cfg.adaptive:
                report.status = "step_failure"
                report.t_fail = t
                report.message = "overflow in fixed-step mode"
                break
            dt = 0.5 * h
            continue

        if positive_xi and y_new[n] <= 0:
            err = np.inf
        if nonneg:
            low = min(float(y_new[:n].min()), float(y_new[n]))
            if low < -CLAMP_TOL:
                err = np.inf

        if err > 1.0:
            report.rejected_steps += 1
            if not cfg.adaptive:
                report.status = "step_failure"
                report.t_fail = t
                report.message = "negative values in fixed-step mode"
                break
            factor = 0.9 * err ** -0.2 if np.isfinite(err) else 0.5
            dt = h * min(0.5, max(0.2, factor))
            continue

        if nonneg:
            neg = y_new < 0
            count = int(neg.sum())
            if count:
                report.clamp_count += count
                y_new[neg] = 0.0
        report.accepted_steps += 1
        t = target if clipped else t + h
        y = y_new
        if cfg.adaptive:
            grow = 4.0 if err == 0 else min(4.0, 0.9 * err ** -0.2)
            proposal = h * max(1.0, grow) if err < 1 else h
            dt = max(dt, proposal) if clipped else proposal
        umax_i = int(np.argmax(y[:n]))
        max_hist.append((t, float(y[umax_i])))

        if crossing is None and y[umax_i] > cfg.blowup_threshold:
            crossing = (t, umax_i)
            if not clipped:
                record(t, y)
        if clipped:
            record(t, y, check=crossing is None or crossing[0] == t)
            k += 1

    if report.status == "blowup" and times[-1] < t:
        record(t, y, check=False)
    elif report.status == "completed" and crossing is not None:
        # ran to t_end with max u still above threshold: genuine escape is
        # not confirmed by a collapsing step, report it as completed
        report.message = f"max u exceeded blowup_threshold at t={crossing[0]:.12g}"

    report.monitor_log = log
    report.max_u_history = np.asarray(max_hist)
    traj = Trajectory(np.asarray(times), np.asarray(us), np.asarray(xis), model, grid)
    if report.status == "completed" and len(traj) >= 4:
        report.fitted_rates = {
            "max_u": _fit_rate(traj.times, traj.u.max(axis=1)),
            "min_u": _fit_rate(traj.times, traj.u.min(axis=1)),
            "xi": _fit_rate(traj.times, traj.xi),
        }
    return traj, report


def _check_initial(model, u0, xi0):
    if not np.all(np.isfinite(u0)) or not np.isfinite(xi0):
        raise InvalidInputError("initial data must be finite")
    if getattr(model, "nonnegative", False):
        if np.any(u0 < 0):
            raise InvalidInputError("u0 must be nonnegative")
        if xi0 < 0:
            raise InvalidInputError("xi0 must be nonnegative")
    if isinstance(model, ActivatorInhibitor) and xi0 <= 0:
        raise InvalidInputError("xi0 > 0 required")


def run_shadow(model, grid: SpatialGrid, u0, xi0: float, cfg: IntegratorConfig, *,
               singular_nodes=(), monitor_params=None):
    """Integrate the shadow system from ``(u0, xi0)``.

    Parameters
    ----------
    singular_nodes : sequence of int
        Nodes treated as measure-zero points in the nonlocal integral (see
        :func:`redistribute_weights`).  A positive-weight cell containing the
        maximum caps its growth, so a discrete blowup at a designated point
        needs this.
    monitor_params : dict, optional
        Constants for monitors (``lambda``, ``x_star``, ``A0``).

    Returns
    -------
    (Trajectory, RunReport)
    """
    u0 = check_field(grid, u0).copy()
    xi0 = float(xi0)
    _check_initial(model, u0, xi0)
    weights = redistribute_weights(grid, singular_nodes) if len(singular_nodes) else grid.weights
    monitors = build_monitors(cfg.monitors, model, weights, u0, xi0, monitor_params, cfg.monitor_tol)
    return _integrate(model, weights, np.append(u0, xi0), cfg, monitors, grid)


def run_kinetics(model, u0: float, xi0: float, cfg: IntegratorConfig):
    """Integrate the space-homogeneous system ``u' = f``, ``xi' = g``.

    Monitors are not evaluated (they refer to spatial fields).  The
    trajectory's ``u`` has shape ``(samples, 1)``.
    """
    u0, xi0 = float(u0), float(xi0)
    _check_initial(model, np.array([u0]), xi0)
    return _integrate(model, np.ones(1), np.array([u0, xi0]), cfg, [], None)
