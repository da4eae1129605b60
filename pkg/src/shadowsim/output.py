"""Deterministic CSV output.

All reals are written with 12 significant digits and every file starts with
a header row, so the same run always produces byte-identical files.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

__all__ = ["emit_csv", "write_table", "fmt_real", "read_table"]


def fmt_real(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".12g")
    return str(value)


def write_table(path, header, rows) -> Path:
    """Write one CSV file; I/O errors are re-raised naming the path."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([fmt_real(v) for v in row])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def read_table(path):
    """Header and rows of a CSV file (all values as strings)."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def emit_csv(trajectory, report, path) -> list[Path]:
    """Write ``<path>_trajectory.csv``, ``<path>_scalars.csv`` and ``<path>_report.csv``.

    Parameters
    ----------
    trajectory : Trajectory or None
        ``None`` (or an empty trajectory) gives header-only files.
    report : RunReport or None
    path : str or Path
        Prefix of the three files.
    """
    prefix = str(path)
    traj_rows, scalar_rows = [], []
    if trajectory is not None and len(trajectory):
        grid = trajectory.grid
        if grid is not None:
            x, w = grid.nodes, grid.weights
        else:
            x, w = np.array([0.5]), np.array([1.0])
        for t, u, xi in zip(trajectory.times, trajectory.u, trajectory.xi):
            traj_rows.extend((t, xv, uv) for xv, uv in zip(x, u))
            scalar_rows.append((t, xi, float(w @ u), float(u.max())))
    report_rows = []
    if report is not None:
        report_rows = [(r.tag, r.t, r.lhs, r.rhs, r.passed) for r in report.monitor_log]
    return [
        write_table(prefix + "_trajectory.csv", ("t", "x", "u"), traj_rows),
        write_table(prefix + "_scalars.csv", ("t", "xi", "mass", "max_u"), scalar_rows),
        write_table(prefix + "_report.csv", ("tag", "t", "lhs", "rhs", "pass"), report_rows),
    ]
