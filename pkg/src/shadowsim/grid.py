"""Spatial discretization of the unit interval and the shadow-system state.

The domain is fixed to [0, 1] with measure one, discretized into ``n`` equal
cells.  Fields live on cell centres and integrals use the midpoint rule, so the
weights are positive and sum to one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidGridError, ShapeError

__all__ = [
    "SpatialGrid",
    "ShadowState",
    "make_uniform_grid",
    "quadrature",
    "argmax_set",
    "mask_measure",
    "redistribute_weights",
]


@dataclass(frozen=True, eq=False)
class SpatialGrid:
    """Cell-centred uniform grid on [0, 1].

    Attributes
    ----------
    n_cells : int
    nodes : ndarray
        Cell centres ``(i + 1/2) / n``.
    weights : ndarray
        Cell measures, all ``1/n``.
    """

    n_cells: int
    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        for arr in (self.nodes, self.weights):
            arr.setflags(write=False)

    @property
    def h(self) -> float:
        return 1.0 / self.n_cells

    def __len__(self):
        return self.n_cells

    def __eq__(self, other):
        return isinstance(other, SpatialGrid) and self.n_cells == other.n_cells

    def __hash__(self):
        return hash(("SpatialGrid", self.n_cells))

    def nearest_node(self, x: float) -> int:
        """Index of the cell centre closest to ``x`` (lower index on ties)."""
        return int(np.argmin(np.abs(self.nodes - x)))

    def evaluate(self, func) -> np.ndarray:
        """Evaluate a vectorized function of ``x`` at the nodes."""
        values = np.asarray(func(self.nodes), dtype=float)
        if values.shape == ():
            values = np.full(self.n_cells, float(values))
        return check_field(self, values)

    def refine(self, factor: int = 2) -> "SpatialGrid":
        return make_uniform_grid(self.n_cells * factor)


@dataclass(frozen=True)
class ShadowState:
    """Snapshot ``(u(., t), xi(t), t)`` of the shadow system."""

    u: np.ndarray
    xi: float
    t: float

    def is_nonnegative(self, tol: float = 0.0) -> bool:
        return bool(np.all(self.u >= -tol) and self.xi >= -tol)


def make_uniform_grid(n_cells: int) -> SpatialGrid:
    """Uniform partition of [0, 1] into ``n_cells`` cells.

    >>> make_uniform_grid(4).nodes
    array([0.125, 0.375, 0.625, 0.875])
    """
    if int(n_cells) != n_cells or n_cells < 2:
        raise InvalidGridError(f"n_cells must be an integer >= 2, got {n_cells!r}")
    n = int(n_cells)
    nodes = (np.arange(n) + 0.5) / n
    weights = np.full(n, 1.0 / n)
    return SpatialGrid(n, nodes, weights)


def check_field(grid: SpatialGrid, f) -> np.ndarray:
    arr = np.asarray(f, dtype=float)
    if arr.shape != (grid.n_cells,):
        raise ShapeError(f"field of shape {arr.shape} does not match grid with {grid.n_cells} cells")
    return arr


def quadrature(grid: SpatialGrid, f, weights=None) -> float:
    """Midpoint-rule integral of a nodal field over the unit interval."""
    arr = check_field(grid, f)
    w = grid.weights if weights is None else weights
    return float(np.dot(w, arr))


def argmax_set(grid: SpatialGrid, f, tol: float = 0.0) -> set[int]:
    """All node indices whose value is within ``tol`` of the maximum.

    Ties are never broken: a plateau returns every node on it.
    """
    if tol < 0:
        raise ValueError("tol must be non-negative")
    arr = check_field(grid, f)
    top = arr.max()
    return {int(i) for i in np.flatnonzero(arr >= top - tol)}


def mask_measure(grid: SpatialGrid, mask) -> float:
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (grid.n_cells,):
        raise ShapeError("mask does not match grid")
    return float(grid.weights[mask].sum())


def redistribute_weights(grid: SpatialGrid, nodes) -> np.ndarray:
    """Quadrature weights treating the given nodes as measure-zero points.

    The measure of each listed cell is handed in equal halves to its two
    neighbours (or wholly to the single neighbour at an end), so the weights
    still sum to one and integrate constants and linear functions exactly.
    Used for the nonlocal integral when a node is the designated blowup point:
    a single cell of positive weight cannot carry a point singularity.
    """
    w = grid.weights.copy()
    n = grid.n_cells
    singular = sorted({int(i) for i in nodes})
    for i in singular:
        if not 0 <= i < n:
            raise InvalidGridError(f"node index {i} outside grid")
    singular_set = set(singular)
    for i in singular:
        share = w[i]
        w[i] = 0.0
        nbrs = [j for j in (i - 1, i + 1) if 0 <= j < n and j not in singular_set]
        if not nbrs:
            raise InvalidGridError("singular nodes must have at least one regular neighbour")
        for j in nbrs:
            w[j] += share / len(nbrs)
    w.setflags(write=False)
    return w
