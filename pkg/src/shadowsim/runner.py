"""Execution of run specifications: single runs, figure presets and sweeps."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .analytic import ai_kinetic_regime, blowup_certificate
from .config import RunSpec, apply_override, build_model, preset_spec, validate
from .errors import ConfigError, ShadowSimError
from .expr import Expression
from .grid import make_uniform_grid, mask_measure
from .integrator import IntegratorConfig, run_kinetics, run_shadow
from .kinetics import ActivatorInhibitor, ode_steady_states, shadow_steady_report
from .limit import convergence_study
from .output import emit_csv, write_table

__all__ = ["RunOutcome", "execute", "reproduce_figure", "sweep", "worker_count"]

EXIT_OK, EXIT_ERROR, EXIT_BLOWUP = 0, 1, 2


@dataclass
class RunOutcome:
    status: str
    exit_code: int
    files: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    trajectory: object = None
    report: object = None
    certificate: object = None


def _integrator_config(spec: RunSpec) -> IntegratorConfig:
    return IntegratorConfig(t_end=spec.t_end, dt_init=spec.dt_init, dt_min=spec.dt_min, rel_tol=spec.rel_tol,
                            blowup_threshold=spec.blowup_threshold, sample_every=spec.sample_every,
                            monitors=spec.monitors)


def _prefix(spec: RunSpec) -> str:
    return str(Path(spec.out_dir) / spec.prefix)


def _field(expr_text, grid):
    return Expression(expr_text)(grid.nodes)


def _status_code(status):
    return {"completed": EXIT_OK, "blowup": EXIT_BLOWUP}.get(status, EXIT_ERROR)


def _simulate(spec, model, write):
    grid = make_uniform_grid(spec.n)
    u0 = _field(spec.u0, grid)
    params = {} if spec.lam is None else {"lambda": spec.lam}
    traj, report = run_shadow(model, grid, u0, spec.xi0, _integrator_config(spec),
                              singular_nodes=spec.singular_nodes, monitor_params=params)
    files = emit_csv(traj, report, _prefix(spec)) if write else []
    summary = {"status": report.status, "t_star": report.t_star, "node": report.node,
               "violations": len(report.violations), "max_u": float(traj.u[-1].max()),
               "xi": float(traj.xi[-1])}
    return RunOutcome(report.status, _status_code(report.status), files, summary, traj, report)


def _kinetics(spec, model, write):
    for name, text in (("init.u0", spec.u0),):
        if Expression(text).uses_x:
            raise ConfigError("kinetic runs need a constant initial value", key=name)
    u0 = float(Expression(spec.u0)(np.array([0.5]))[0])
    traj, report = run_kinetics(model, u0, spec.xi0, _integrator_config(spec))
    files = emit_csv(traj, report, _prefix(spec)) if write else []
    summary = {"status": report.status, "t_star": report.t_star,
               "u": float(traj.u[-1, 0]), "xi": float(traj.xi[-1])}
    if isinstance(model, ActivatorInhibitor):
        regime = ai_kinetic_regime(model.p, model.q, model.r, model.s, model.tau)
        summary.update(regime=regime.regime, unit_state_stable=regime.unit_state_stable)
    return RunOutcome(report.status, _status_code(report.status), files, summary, traj, report)


def _steady(spec, model, write):
    grid = make_uniform_grid(spec.n)
    rows = []
    if spec.steady_mask is None:
        states = ode_steady_states(model)
        diag = []
        for st in states:
            rows.append(("ode", st.u_bar, st.xi_bar, 1.0, st.classification, st.residual_f, st.residual_g))
    else:
        mask = Expression(spec.steady_mask)(grid.nodes) > 0
        states, diag = shadow_steady_report(model, grid, mask)
        m = mask_measure(grid, mask)
        for st in states:
            rows.append(("shadow", st.u_bar, st.xi_bar, m, st.classification, st.residual_f, st.residual_g))
    files = []
    if write:
        files.append(write_table(_prefix(spec) + "_steady.csv",
                                 ("kind", "u_bar", "xi_bar", "mask_measure", "classification",
                                  "residual_f", "residual_g"), rows))
    return RunOutcome("completed", EXIT_OK, files, {"states": len(rows), "diagnostics": diag})


def _certify(spec, model, write):
    grid = make_uniform_grid(spec.n)
    expr = Expression(spec.u0)
    cert = blowup_certificate(model, grid, lambda g: expr(g.nodes), spec.xi0)
    rows = [(h.name, h.lhs, h.rhs, h.satisfied) for h in cert.hypotheses]
    files = []
    if write:
        files.append(write_table(_prefix(spec) + "_certificate.csv", ("hypothesis", "lhs", "rhs", "satisfied"), rows))
    summary = {"certified": cert.certified, "Tmax_upper": cert.Tmax_upper, "x_star": cert.x_star,
               "singular_mass": cert.A0_or_B0, "lambda_window": cert.lambda_window, "notes": cert.notes}
    return RunOutcome("certified" if cert.certified else "not-certified", EXIT_OK, files, summary,
                      certificate=cert)


def _limit(spec, model, write):
    grid = make_uniform_grid(spec.n)
    u0 = _field(spec.u0, grid)
    v0 = _field(spec.v0, grid) if spec.v0 is not None else np.full(grid.n_cells, spec.xi0)
    study = convergence_study(model, grid, u0, v0, spec.D_list, spec.alpha, spec.T)
    rows = [(D, m, study.sup_bound[D]) for D, m in study.table]
    files = []
    if write:
        files.append(write_table(_prefix(spec) + "_limit.csv", ("D", "metric", "sup_bound"), rows))
    summary = {"slope": study.slope, "strictly_decreasing": study.strictly_decreasing, "table": study.table}
    return RunOutcome("completed", EXIT_OK, files, summary)


_HANDLERS = {
    "simulate": _simulate,
    "figure": _simulate,
    "kinetics": _kinetics,
    "steady": _steady,
    "certify": _certify,
    "limit": _limit,
}


def execute(spec: RunSpec, write: bool = True) -> RunOutcome:
    """Run one validated spec and (optionally) write its output files."""
    spec = validate(spec)
    if spec.command == "sweep":
        return sweep(spec, spec.sweep_axis, spec.sweep_values, write=write)
    model = build_model(spec)
    return _HANDLERS[spec.command](spec, model, write)


def reproduce_figure(figure_id: int, out_dir=".", write: bool = True, **overrides):
    """Run a figure preset; returns ``(trajectory, report, files)``."""
    spec = replace(preset_spec(figure_id), out_dir=str(out_dir), **overrides)
    outcome = execute(spec, write=write)
    return outcome.trajectory, outcome.report, outcome.files


def worker_count() -> int:
    """Worker pool size: ``SHADOWSIM_THREADS`` if set, else the CPU count."""
    env = os.environ.get("SHADOWSIM_THREADS")
    if env:
        try:
            value = int(env)
        except ValueError:
            raise ConfigError(f"SHADOWSIM_THREADS must be an integer, got {env!r}") from None
        return max(1, value)
    return max(1, os.cpu_count() or 1)


def _sweep_row(base, axis, index, value, write):
    row = {"index": index, "value": value, "status": "error", "exit_code": EXIT_ERROR, "t_star": None,
           "certified": None, "unit_state_stable": None, "regime": None, "error": ""}
    try:
        spec = apply_override(base, axis, repr(float(value)))
        spec = replace(spec, command=base.sweep_command, prefix=f"{base.prefix}_row{index:03d}")
        outcome = execute(spec, write=write)
        row.update(status=outcome.status, exit_code=outcome.exit_code,
                   t_star=outcome.summary.get("t_star"), certified=outcome.summary.get("certified"))
        model = build_model(spec)
        if isinstance(model, ActivatorInhibitor):
            regime = ai_kinetic_regime(model.p, model.q, model.r, model.s, model.tau)
            row.update(unit_state_stable=regime.unit_state_stable, regime=regime.regime)
    except (ShadowSimError, ValueError, ArithmeticError, OSError) as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


SWEEP_COLUMNS = ("index", "value", "status", "exit_code", "t_star", "certified", "unit_state_stable", "regime", "error")


def sweep(base: RunSpec, axis: str, values, write: bool = True, max_workers: int | None = None) -> RunOutcome:
    """Run ``base.sweep_command`` once per value of ``axis`` in a thread pool.

    Failed rows are recorded with their error and do not stop the sweep.
    The summary CSV is written after all rows finish, in value order.
    """
    values = list(values)
    if values and axis is None:
        raise ConfigError("sweep axis required", key="sweep.axis")
    workers = max_workers or worker_count()
    if values:
        with ThreadPoolExecutor(max_workers=min(workers, len(values))) as pool:
            futures = [pool.submit(_sweep_row, base, axis, i, v, write) for i, v in enumerate(values)]
            rows = [f.result() for f in futures]
    else:
        rows = []
    files = []
    if write:
        files.append(write_table(_prefix(base) + "_sweep.csv", SWEEP_COLUMNS,
                                 [tuple(r[c] for c in SWEEP_COLUMNS) for r in rows]))
    return RunOutcome("completed", EXIT_OK, files, {"rows": rows})
