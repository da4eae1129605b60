"""Closed-form solution formulas and blowup certificates.

For Gray-Scott and activator-inhibitor kinetics the ``u`` equation is a
Bernoulli equation once ``xi(t)`` is known, so ``u(x, t)`` is an explicit
functional of the history of ``xi``::

    Gray-Scott:  u = exp(-c t) / (1/u0 - int_0^t xi(s) exp(-c s) ds),  c = B + k
    AI:          u = exp(-t) / (u0^(1-p) - (p-1) int_0^t xi(s)^(-q) exp(-(p-1) s) ds)^(1/(p-1))

These are used as an independent oracle for the integrator and to compute
blowup times.  Certificates evaluate sufficient conditions for blowup
(Gray-Scott, activator-inhibitor) or for unbounded growth at the maximum of
``u0`` (carcinogenesis).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import InvalidInputError, NotApplicableError, PastBlowupError
from .grid import SpatialGrid, argmax_set, check_field, make_uniform_grid, mask_measure
from .kinetics import ActivatorInhibitor, Carcinogenesis, GrayScott

__all__ = [
    "XiHistory",
    "SingularMass",
    "Hypothesis",
    "BlowupCertificate",
    "AIRegime",
    "singular_mass_functional",
    "discrete_singular_mass",
    "blowup_certificate",
    "exact_u",
    "exact_field",
    "tmax_from_history",
    "ai_kinetic_regime",
    "cusp_profile",
]

CONVERGENCE_RATIO = 0.05
_GL_X, _GL_W = leggauss(8)


# ---------------------------------------------------------------- xi history


@dataclass(frozen=True)
class XiHistory:
    """Piecewise-linear interpolant of sampled ``(t, xi)`` pairs."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape or t.size == 0:
            raise InvalidInputError("times and values must be matching 1-D arrays")
        if np.any(np.diff(t) <= 0):
            raise InvalidInputError("history times must be strictly increasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    @classmethod
    def constant(cls, value: float, t_end: float) -> "XiHistory":
        return cls(np.array([0.0, float(t_end)]), np.array([float(value)] * 2))

    @classmethod
    def from_trajectory(cls, traj) -> "XiHistory":
        return cls(traj.times, traj.xi)

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    def __call__(self, t):
        return np.interp(t, self.times, self.values)


def _kernel(model):
    """``(phi, c, threshold_fn)`` so that blowup happens when
    ``int_0^t phi(xi(s)) exp(-c s) ds`` reaches ``threshold_fn(u0)``."""
    if isinstance(model, GrayScott):
        return (lambda xi: xi), model.decay, (lambda u0: 1.0 / u0)
    if isinstance(model, ActivatorInhibitor):
        p, q = model.p, model.q
        return ((lambda xi: (p - 1.0) * xi ** (-q)), p - 1.0,
                (lambda u0: u0 ** (1.0 - p)))
    raise NotApplicableError(f"no closed-form solution for model {getattr(model, 'name', model)!r}")


class _CumulativeIntegral:
    """``I(t) = int_0^t phi(xi(s)) exp(-c s) ds`` on a piecewise-linear history.

    Each knot interval is integrated with 8-point Gauss-Legendre, which is
    far more accurate than the sampling of ``xi`` itself.  Beyond the last
    knot ``xi`` is held at its final value when ``extrapolate`` is set.
    """

    def __init__(self, model, hist: XiHistory, extrapolate=False):
        self.phi, self.c, self.threshold = _kernel(model)
        self.hist = hist
        self.extrapolate = extrapolate
        t = hist.times
        if t[0] > 0:
            raise InvalidInputError("history must start at t=0")
        mid, half = 0.5 * (t[1:] + t[:-1]), 0.5 * np.diff(t)
        s = mid[:, None] + half[:, None] * _GL_X
        pieces = half * np.sum(_GL_W * self.phi(hist(s)) * np.exp(-self.c * s), axis=1)
        self.knots = np.concatenate([[0.0], np.cumsum(pieces)])

    def _piece(self, a, b):
        if b <= a:
            return 0.0
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        s = mid + half * _GL_X
        return float(half * np.sum(_GL_W * self.phi(self.hist(s)) * np.exp(-self.c * s)))

    def _tail(self, t):
        t_end = self.hist.t_end
        rate = self.phi(self.hist.values[-1])
        if self.c == 0:
            return rate * (t - t_end)
        return rate * (np.exp(-self.c * t_end) - np.exp(-self.c * t)) / self.c

    def __call__(self, t: float) -> float:
        t_end = self.hist.t_end
        if t < 0:
            raise InvalidInputError("t must be nonnegative")
        if t > t_end * (1 + 1e-12):
            if not self.extrapolate:
                raise InvalidInputError(f"t={t} beyond history end {t_end}")
            return float(self.knots[-1] + self._tail(t))
        t = min(t, t_end)
        k = int(np.searchsorted(self.hist.times, t, side="right")) - 1
        k = min(max(k, 0), self.hist.times.size - 1)
        return float(self.knots[k] + self._piece(self.hist.times[k], t))

    def limit(self) -> float:
        """Value as ``t -> infinity`` under constant extrapolation."""
        if self.c == 0:
            return np.inf
        return float(self.knots[-1] + self.phi(self.hist.values[-1]) * np.exp(-self.c * self.hist.t_end) / self.c)


def exact_u(model, x_index: int, t: float, u0, xi_hist: XiHistory, extrapolate=False) -> float:
    """Closed-form ``u(x_i, t)`` given the ``xi`` history.

    Raises
    ------
    PastBlowupError
        If the denominator has vanished by time ``t``; carries the crossing
        time when it can be located.
    """
    u0 = np.asarray(u0, dtype=float)
    return float(exact_field(model, t, u0[[x_index]], xi_hist, extrapolate)[0])


def exact_field(model, t: float, u0, xi_hist: XiHistory, extrapolate=False) -> np.ndarray:
    """Vectorized :func:`exact_u` over all nodes of ``u0``."""
    u0 = np.asarray(u0, dtype=float)
    if np.any(u0 < 0):
        raise InvalidInputError("u0 must be nonnegative")
    integral = _CumulativeIntegral(model, xi_hist, extrapolate)
    c = integral.c
    I = integral(t)
    out = np.zeros_like(u0)
    pos = u0 > 0
    with np.errstate(divide="ignore"):
        denom = integral.threshold(u0[pos]) - I
    if np.any(denom <= 0):
        t_cross = tmax_from_history(model, float(u0.max()), xi_hist, extrapolate=extrapolate)
        raise PastBlowupError(f"closed-form solution has blown up before t={t}", t_cross)
    if isinstance(model, GrayScott):
        out[pos] = np.exp(-c * t) / denom
    else:
        out[pos] = np.exp(-t) / denom ** (1.0 / (model.p - 1.0))
    return out


def tmax_from_history(model, u0_max: float, xi_hist: XiHistory, extrapolate=False, tol=1e-12):
    """Time at which the closed-form solution started from ``u0_max`` blows up.

    Returns ``None`` if the cumulative integral stays below its threshold on
    the history (or for all time, with ``extrapolate`` and constant ``xi``
    beyond the last sample).
    """
    if not u0_max > 0:
        raise InvalidInputError("u0_max must be positive")
    integral = _CumulativeIntegral(model, xi_hist, extrapolate)
    target = integral.threshold(float(u0_max))
    knots = integral.knots
    hit = np.flatnonzero(knots >= target)
    if hit.size:
        j = int(hit[0])
        if j == 0:
            return 0.0
        lo, hi = float(xi_hist.times[j - 1]), float(xi_hist.times[j])
    else:
        if not extrapolate or integral.limit() <= target:
            return None
        lo = xi_hist.t_end
        rest = target - knots[-1]
        rate = integral.phi(xi_hist.values[-1])
        c = integral.c
        if c == 0:
            return lo + rest / rate
        # closed form for the constant tail
        return float(-np.log(np.exp(-c * lo) - c * rest / rate) / c)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if integral(mid) >= target:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------- singular masses


def _singular_integrand(model, u0, x_star):
    peak = u0[x_star]
    others = np.ones(u0.size, bool)
    others[x_star] = False
    v = u0[others]
    if isinstance(model, GrayScott):
        vals = (peak * v / (peak - v)) ** 2
    elif isinstance(model, ActivatorInhibitor):
        p, r = model.p, model.r
        vals = (peak * v / (peak ** (p - 1) - v ** (p - 1)) ** (1.0 / (p - 1))) ** r
    else:
        raise NotApplicableError("singular mass is defined for Gray-Scott and activator-inhibitor kinetics")
    return others, vals


def discrete_singular_mass(model, weights, u0, x_star: int) -> float:
    """Quadrature of the singular integrand, skipping the cell of ``x_star``."""
    u0 = np.asarray(u0, dtype=float)
    if np.any(np.delete(u0, x_star) >= u0[x_star]):
        raise NotApplicableError("u0 must have a strict maximum at x_star")
    others, vals = _singular_integrand(model, u0, x_star)
    return float(np.asarray(weights)[others] @ vals)


@dataclass(frozen=True)
class SingularMass:
    """Value of the singular mass functional with its refinement check.

    ``convergent`` is ``None`` when no refinement was possible (bare field).
    """

    value: float
    refined: float | None
    ratio: float | None
    convergent: bool | None
    n_cells: int
    x_star: int


def _strict_argmax(grid, u0):
    top = argmax_set(grid, u0, 0.0)
    if len(top) != 1:
        raise NotApplicableError(f"u0 has no strict maximum (tie set of size {len(top)})")
    return top.pop()


def singular_mass_functional(model, grid: SpatialGrid, u0, x_star: int | None = None) -> SingularMass:
    """Discrete ``A0`` (Gray-Scott) or ``B0`` (activator-inhibitor).

    Parameters
    ----------
    u0 : array or callable
        Nodal field, or a factory ``u0(grid) -> field`` which enables the
        refinement check on ``2n`` cells.
    x_star : int, optional
        Node of the maximum; defaults to the strict argmax.

    Notes
    -----
    The functional is improper at ``x_star``; its discrete version drops that
    cell.  If the value at ``2n`` cells differs by more than 5% the integral
    is reported as divergent.
    """
    factory = u0 if callable(u0) else None
    field_ = check_field(grid, factory(grid) if factory else u0)
    star = _strict_argmax(grid, field_)
    if x_star is not None and int(x_star) != star:
        raise NotApplicableError(f"x_star={x_star} is not the strict maximum (found {star})")
    value = discrete_singular_mass(model, grid.weights, field_, star)
    if factory is None:
        return SingularMass(value, None, None, None, grid.n_cells, star)
    fine = grid.refine(2)
    fine_field = check_field(fine, factory(fine))
    refined = discrete_singular_mass(model, fine.weights, fine_field, _strict_argmax(fine, fine_field))
    if value == 0.0:
        ratio = 1.0 if refined == 0.0 else np.inf
    else:
        ratio = refined / value
    convergent = bool(abs(ratio - 1.0) <= CONVERGENCE_RATIO)
    return SingularMass(value, refined, float(ratio), convergent, grid.n_cells, star)


def cusp_profile(M: float, ell: float = 0.25, center: float = 0.5):
    """Factory ``grid -> M (1 - |x - x0|^ell)`` with ``x0`` the node nearest ``center``.

    Centring on a node keeps the maximum strict on every grid, so the factory
    can be handed to :func:`singular_mass_functional` for refinement.  For
    ``ell < 1/2`` the Gray-Scott singular mass is finite.
    """
    def factory(grid):
        x0 = grid.nodes[grid.nearest_node(center)]
        return M * (1.0 - np.abs(grid.nodes - x0) ** ell)

    return factory


# -------------------------------------------------------------- certificates


@dataclass(frozen=True)
class Hypothesis:
    name: str
    lhs: float
    rhs: float
    satisfied: bool


@dataclass
class BlowupCertificate:
    """Outcome of checking the sufficient conditions for blowup or growth.

    ``Tmax_upper`` is set only when every hypothesis holds and the singular
    mass is reliable.  Its formula comes from the lower bound used in the
    blowup argument (``derived_from_proof``), not from a closed expression.
    """

    model_tag: str
    hypotheses: list[Hypothesis]
    x_star: int
    A0_or_B0: float | None = None
    Tmax_upper: float | None = None
    lambda_window: tuple[float, float] | None = None
    singular_mass: SingularMass | None = None
    reliable: bool = True
    peak_set_measure: float | None = None
    derived_from_proof: bool = True
    notes: list[str] = field(default_factory=list)

    @property
    def satisfied(self) -> bool:
        return all(h.satisfied for h in self.hypotheses)

    @property
    def certified(self) -> bool:
        return self.satisfied and self.reliable


def _gs_ai_certificate(model, grid, u0, xi0):
    factory = u0 if callable(u0) else None
    field_ = check_field(grid, factory(grid) if factory else u0)
    star = _strict_argmax(grid, field_)
    mass = singular_mass_functional(model, grid, factory or field_, star)
    peak = float(field_[star])
    hyps = [Hypothesis("positive-peak", peak, 0.0, peak > 0)]
    notes = []
    reliable = mass.convergent is not False
    if mass.convergent is None:
        notes.append("singular mass not refined (bare field); convergence unchecked")
    elif not mass.convergent:
        notes.append(f"singular mass changes by factor {mass.ratio:.4g} under refinement")
    hyps.append(Hypothesis("singular-mass-convergent", mass.ratio if mass.ratio is not None else 1.0,
                           1.0 + CONVERGENCE_RATIO, reliable))
    tmax = None
    if isinstance(model, GrayScott):
        c = model.decay
        m = min(xi0, model.B / (mass.value + model.B))
        lhs, rhs = m / c, (1.0 / peak if peak > 0 else np.inf)
        hyps.append(Hypothesis("xi-floor-exceeds-peak-inverse", lhs, rhs, bool(lhs > rhs)))
        if all(h.satisfied for h in hyps):
            tmax = float(-np.log(1.0 - c / (peak * m)) / c)
    else:
        p, q, s = model.p, model.q, model.s
        M = max(xi0, mass.value ** (1.0 / (1.0 + s)))
        lhs, rhs = M ** (-q), (peak ** (1.0 - p) if peak > 0 else np.inf)
        hyps.append(Hypothesis("xi-ceiling-below-peak-power", lhs, rhs, bool(lhs > rhs)))
        if all(h.satisfied for h in hyps):
            tmax = float(-np.log(1.0 - M ** q * peak ** (1.0 - p)) / (p - 1.0))
    return BlowupCertificate(model.name, hyps, star, mass.value, tmax, None, mass, reliable, notes=notes)


def _carc_certificate(model, grid, u0, xi0):
    field_ = check_field(grid, u0(grid) if callable(u0) else u0)
    a, d, kappa0 = model.a, model.d, model.kappa0
    q2 = float(grid.weights @ (field_ * field_))
    top = argmax_set(grid, field_, 0.0)
    mask = np.zeros(grid.n_cells, bool)
    mask[list(top)] = True
    hi_lemma = 1.0 - 2.0 * a / kappa0
    hi = min(hi_lemma, 1.0 - xi0 / kappa0)
    strict_hi = xi0 * q2 / kappa0
    hyps = [
        Hypothesis("growth-margin", 2.0 * (a - d), 1.0, 2.0 * (a - d) >= 1.0),
        Hypothesis("supply-bound", kappa0, 4.0 * a, kappa0 >= 4.0 * a),
        Hypothesis("initial-product", xi0 * q2, 0.5 * kappa0, xi0 * q2 > 0.5 * kappa0),
        Hypothesis("initial-xi", xi0, 0.5 * kappa0, xi0 <= 0.5 * kappa0),
        Hypothesis("single-peak", float(len(top)), 1.0, len(top) == 1),
    ]
    window = None
    if hi_lemma >= 0.5 and hi >= 0.5 and strict_hi > 0.5:
        window = (0.5, float(min(hi, strict_hi)))
    notes = []
    if strict_hi <= hi:
        notes.append("upper end of lambda window is exclusive")
    return BlowupCertificate(model.name, hyps, int(np.argmax(field_)), None, None, window,
                             peak_set_measure=mask_measure(grid, mask), notes=notes)


def blowup_certificate(model, grid: SpatialGrid, u0, xi0: float) -> BlowupCertificate:
    """Check the sufficient conditions for blowup (or unbounded growth).

    Parameters
    ----------
    u0 : array or callable
        Initial field or factory ``u0(grid)``; the factory form enables the
        refinement check of the singular mass.
    """
    xi0 = float(xi0)
    if isinstance(model, (GrayScott, ActivatorInhibitor)):
        return _gs_ai_certificate(model, grid, u0, xi0)
    if isinstance(model, Carcinogenesis):
        return _carc_certificate(model, grid, u0, xi0)
    raise NotApplicableError("certificates exist for Gray-Scott, activator-inhibitor and carcinogenesis kinetics")


# --------------------------------------------------------------- AI regimes


@dataclass(frozen=True)
class AIRegime:
    """Classification of the activator-inhibitor kinetic ODE.

    ``regime`` is ``"global"``, ``"blowup-possible"`` or ``"neither-classified"``;
    ``unit_state_stable`` refers to the constant solution ``(1, 1)``.
    """

    regime: str
    unit_state_stable: bool
    tau_criterion: bool
    exponent_condition: bool
    eigenvalues: tuple


def ai_kinetic_regime(p, q, r, s, tau) -> AIRegime:
    """Global existence / blowup regime and stability of ``(1, 1)``.

    >>> ai_kinetic_regime(2, 1, 2, 0, 0.5).regime
    'global'
    """
    ActivatorInhibitor(p, q, r, s, tau)  # validates the exponents
    if p - 1 <= r:
        regime = "global"
    elif q > s + 1:
        regime = "blowup-possible"
    else:
        regime = "neither-classified"
    jac = np.array([[p - 1.0, -q], [r / tau, -(s + 1.0) / tau]])
    eig = np.linalg.eigvals(jac)
    return AIRegime(
        regime=regime,
        unit_state_stable=bool(np.all(eig.real < 0)),
        tau_criterion=bool(tau < (s + 1.0) / (p - 1.0)),
        exponent_condition=bool((p - 1.0) / r < q / (s + 1.0)),
        eigenvalues=tuple(complex(e) for e in eig),
    )
