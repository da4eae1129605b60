"""Model nonlinearities, stationary solutions and their stability.

Every model exposes ``f(u, xi)`` (the local reaction for ``u``) and ``g(u, xi)``,
a pointwise integrand whose integral over the unit interval is the full right
hand side of the ``xi`` equation.  Local terms such as ``B(1 - xi)`` or
``kappa0`` are folded into ``g``; because the domain has measure one they
integrate to themselves.  The same ``g`` is the right-hand side of the
space-homogeneous kinetic ODE.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConstraintError, InvalidEigenvectorError, SingularKineticsError
from .grid import SpatialGrid, check_field, mask_measure, quadrature

__all__ = [
    "GrayScott",
    "ActivatorInhibitor",
    "Carcinogenesis",
    "Generic",
    "SteadyState",
    "eval_f",
    "eval_g",
    "eval_partials",
    "ode_jacobian",
    "ode_steady_states",
    "shadow_steady_states",
    "classify_shadow_stability",
    "eigenpair_residual",
    "autocatalysis_rate",
    "RESIDUAL_TOL",
]

RESIDUAL_TOL = 1e-10

TRIVIAL_STABLE = "trivial-stable"
UNSTABLE_AUTOCATALYTIC = "unstable-autocatalytic"
ODE_STABLE = "ode-stable"
ODE_UNSTABLE = "ode-unstable"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class GrayScott:
    """``f = -(B+k)u + u^2 xi``, ``g = -xi u^2 + B(1 - xi)``."""

    B: float
    k: float
    name = "gray_scott"
    nonnegative = True

    def __post_init__(self):
        if not self.B > 0:
            raise ConstraintError("B>0 required")
        # k = 0 keeps every formula valid and appears in worked examples
        if not self.k >= 0:
            raise ConstraintError("k>=0 required")

    @property
    def decay(self) -> float:
        return self.B + self.k

    def f(self, u, xi):
        return -(self.B + self.k) * u + u * u * xi

    def g(self, u, xi):
        return -xi * u * u + self.B * (1.0 - xi)

    def partials(self, u, xi):
        f_u = -(self.B + self.k) + 2.0 * u * xi
        f_xi = u * u
        g_u = -2.0 * xi * u
        g_xi = -u * u - self.B
        return f_u, f_xi, g_u, g_xi

    def params(self):
        return {"B": self.B, "k": self.k}


@dataclass(frozen=True)
class ActivatorInhibitor:
    """Shadow Gierer-Meinhardt type kinetics.

    ``f = -u + u^p / xi^q`` and ``tau xi_t = -xi + int u^r / xi^s``, so the
    integrand is ``g = (-xi + u^r / xi^s) / tau``.
    """

    p: float
    q: float
    r: float
    s: float
    tau: float
    name = "activator_inhibitor"
    nonnegative = True

    def __post_init__(self):
        if not self.p > 1:
            raise ConstraintError("p>1 required")
        if not self.q > 0:
            raise ConstraintError("q>0 required")
        if not self.r > 0:
            raise ConstraintError("r>0 required")
        if not self.s >= 0:
            raise ConstraintError("s>=0 required")
        if not self.tau > 0:
            raise ConstraintError("tau>0 required")

    def _check(self, xi):
        if np.any(np.asarray(xi) <= 0):
            raise SingularKineticsError("activator-inhibitor kinetics need xi > 0")

    def f(self, u, xi):
        self._check(xi)
        return -u + u**self.p / xi**self.q

    def g(self, u, xi):
        self._check(xi)
        return (-xi + u**self.r / xi**self.s) / self.tau

    def partials(self, u, xi):
        self._check(xi)
        p, q, r, s, tau = self.p, self.q, self.r, self.s, self.tau
        f_u = -1.0 + p * u ** (p - 1) / xi**q
        f_xi = -q * u**p / xi ** (q + 1)
        g_u = r * u ** (r - 1) / xi**s / tau
        g_xi = (-1.0 - s * u**r / xi ** (s + 1)) / tau
        return f_u, f_xi, g_u, g_xi

    def params(self):
        return {"p": self.p, "q": self.q, "r": self.r, "s": self.s, "tau": self.tau}


@dataclass(frozen=True)
class Carcinogenesis:
    """``f = (a u xi / (1 + u xi) - d) u``, ``g = -xi - xi u^2 + kappa0``."""

    a: float
    d: float
    kappa0: float
    name = "carcinogenesis"
    nonnegative = True

    def __post_init__(self):
        for key in ("a", "d", "kappa0"):
            if not getattr(self, key) > 0:
                raise ConstraintError(f"{key}>0 required")

    def f(self, u, xi):
        uxi = u * xi
        return (self.a * uxi / (1.0 + uxi) - self.d) * u

    def g(self, u, xi):
        return -xi - xi * u * u + self.kappa0

    def partials(self, u, xi):
        a, d = self.a, self.d
        den = 1.0 + u * xi
        f_u = a * u * xi / den - d + a * u * xi / den**2
        f_xi = a * u * u / den**2
        g_u = -2.0 * xi * u
        g_xi = -1.0 - u * u
        return f_u, f_xi, g_u, g_xi

    def params(self):
        return {"a": self.a, "d": self.d, "kappa0": self.kappa0}


@dataclass(frozen=True)
class Generic:
    """User-supplied kinetics. All callables must accept numpy arrays."""

    f_func: Callable
    g_func: Callable
    f_u: Callable | None = None
    f_xi: Callable | None = None
    g_u: Callable | None = None
    g_xi: Callable | None = None
    nonnegative: bool = False
    name = "generic"

    def f(self, u, xi):
        return self.f_func(u, xi) + 0.0 * u

    def g(self, u, xi):
        return self.g_func(u, xi) + 0.0 * u

    def partials(self, u, xi):
        funcs = (self.f_u, self.f_xi, self.g_u, self.g_xi)
        if any(fn is None for fn in funcs):
            raise NotImplementedError("Generic kinetics were built without partial derivatives")
        return tuple(fn(u, xi) + 0.0 * u for fn in funcs)

    def params(self):
        return {}


def zero_kinetics() -> Generic:
    """``f = g = 0`` with exact partials; used for pure-diffusion checks."""
    zero = lambda u, xi: 0.0 * u  # noqa: E731
    return Generic(zero, zero, zero, zero, zero, zero)


def eval_f(model, u, xi):
    out = model.f(u, xi)
    return float(out) if np.ndim(out) == 0 else out


def eval_g(model, u, xi):
    out = model.g(u, xi)
    return float(out) if np.ndim(out) == 0 else out


def eval_partials(model, u, xi):
    """Return ``(f_u, f_xi, g_u, g_xi)`` evaluated at ``(u, xi)``."""
    out = model.partials(u, xi)
    if all(np.ndim(v) == 0 for v in out):
        return tuple(float(v) for v in out)
    return out


def ode_jacobian(model, u: float, xi: float) -> np.ndarray:
    f_u, f_xi, g_u, g_xi = eval_partials(model, u, xi)
    return np.array([[f_u, f_xi], [g_u, g_xi]])


# ---------------------------------------------------------------- steady states


@dataclass
class SteadyState:
    """A stationary solution.

    For constant states ``mask`` is ``None`` and ``U`` is the scalar value;
    for piecewise-constant states ``U`` is a nodal field equal to ``u_bar`` on
    ``mask`` and zero elsewhere.
    """

    U: float | np.ndarray
    xi_bar: float
    u_bar: float
    mask: np.ndarray | None = None
    classification: str = INCONCLUSIVE
    residual_f: float = 0.0
    residual_g: float = 0.0
    eigenvalues: tuple | None = None
    diagnostics: list[str] = field(default_factory=list)

    @property
    def is_constant(self) -> bool:
        return self.mask is None

    def as_pair(self):
        return (self.u_bar, self.xi_bar)


def _quadratic_roots(a: float, b: float, c: float) -> list[float]:
    """Real roots of ``a z^2 + b z + c`` via the cancellation-free formula."""
    disc = b * b - 4 * a * c
    if disc < 0:
        return []
    sq = math.sqrt(disc)
    q = -0.5 * (b + math.copysign(sq, b))
    roots = []
    if q != 0:
        roots.extend([q / a, c / q])
    else:
        roots.append(0.0)
    return sorted(set(roots), reverse=True)


def _newton_polish(fn, dfn, z, tol=1e-12, maxiter=20):
    for _ in range(maxiter):
        d = dfn(z)
        if d == 0:
            break
        step = fn(z) / d
        z -= step
        if abs(step) <= tol * max(1.0, abs(z)):
            break
    return z


def _classify_ode(model, u, xi):
    eig = np.linalg.eigvals(ode_jacobian(model, u, xi))
    label = ODE_STABLE if np.all(eig.real < 0) else ODE_UNSTABLE
    if np.any(eig.real == 0) and np.all(eig.real <= 0):
        label = INCONCLUSIVE
    return label, tuple(complex(e) for e in eig)


def _constant_state(model, u, xi, note=None):
    res_f = abs(eval_f(model, u, xi))
    res_g = abs(eval_g(model, u, xi))
    label, eig = _classify_ode(model, u, xi)
    st = SteadyState(U=float(u), xi_bar=float(xi), u_bar=float(u), classification=label,
                     residual_f=res_f, residual_g=res_g, eigenvalues=eig)
    if note:
        st.diagnostics.append(note)
    return st


def ode_steady_states(model) -> list[SteadyState]:
    """All nonnegative constant solutions of the kinetic ODE, with the ODE
    (2x2 Jacobian) stability label ``ode-stable`` / ``ode-unstable``."""
    out = []
    if isinstance(model, GrayScott):
        out.append(_constant_state(model, 0.0, 1.0, "trivial state"))
        c = model.decay
        # B xi^2 - B xi + (B+k)^2 = 0 after substituting u = (B+k)/xi
        for xi in _quadratic_roots(model.B, -model.B, c * c):
            if xi > 0:
                out.append(_constant_state(model, c / xi, xi))
    elif isinstance(model, ActivatorInhibitor):
        out.append(_constant_state(model, 1.0, 1.0))
        if math.isclose(model.r * model.q / (model.p - 1), model.s + 1):
            out[-1].diagnostics.append("degenerate exponents: a continuum of constant states exists")
    elif isinstance(model, Carcinogenesis):
        a, d, k0 = model.a, model.d, model.kappa0
        out.append(_constant_state(model, 0.0, k0, "trivial state"))
        if a > d:
            # d u^2 - kappa0 (a - d) u + d = 0, xi = d / ((a - d) u)
            for u in _quadratic_roots(d, -k0 * (a - d), d):
                if u > 0:
                    u = _newton_polish(lambda z: d * z * z - k0 * (a - d) * z + d,
                                       lambda z: 2 * d * z - k0 * (a - d), u)
                    out.append(_constant_state(model, u, d / ((a - d) * u)))
    else:
        raise NotImplementedError("steady states are enumerated only for the built-in models")
    return out


def _piecewise_state(model, grid, mask, u_bar, xi_bar, diagnostics=()):
    U = np.where(mask, u_bar, 0.0)
    res_f = float(np.max(np.abs(model.f(U, xi_bar))))
    res_g = abs(quadrature(grid, model.g(U, xi_bar)))
    st = SteadyState(U=U, xi_bar=float(xi_bar), u_bar=float(u_bar), mask=mask.copy(),
                     residual_f=res_f, residual_g=res_g, diagnostics=list(diagnostics))
    st.classification = classify_shadow_stability(model, st, grid)
    return st


def shadow_steady_states(model, grid: SpatialGrid, mask) -> list[SteadyState]:
    """Piecewise-constant stationary solutions supported on ``mask``.

    ``U = u_bar`` on the mask and ``0`` elsewhere.  Every returned state has
    passed the residual check (``RESIDUAL_TOL``).  When no admissible root
    exists an empty list is returned; inspect :func:`shadow_steady_report`
    for the reason.
    """
    return shadow_steady_report(model, grid, mask)[0]


def shadow_steady_report(model, grid: SpatialGrid, mask):
    """Like :func:`shadow_steady_states` but also returns diagnostics."""
    mask = np.asarray(mask, dtype=bool)
    m = mask_measure(grid, mask)
    if not 0 < m <= 1 + 1e-12:
        raise ValueError(f"mask measure must lie in (0, 1], got {m}")
    diag: list[str] = []
    states = []
    if isinstance(model, GrayScott):
        c = model.decay
        roots = _quadratic_roots(model.B, -model.B, m * c * c)
        if not roots:
            diag.append("negative discriminant: B < 4 m (B+k)^2, no stationary solution on this mask")
        pos = [xi for xi in roots if xi > 0]
        if len(pos) == 2:
            diag.append("both quadratic roots are positive (sum 1, positive product)")
        for xi in pos:
            states.append(_piecewise_state(model, grid, mask, c / xi, xi, diag))
    elif isinstance(model, ActivatorInhibitor):
        p, q, r, s = model.p, model.q, model.r, model.s
        expo = r * q / (p - 1) - s - 1.0
        if abs(expo) < 1e-14:
            diag.append("degenerate exponent rq/(p-1) - s - 1 = 0: "
                        + ("every xi solves" if math.isclose(m, 1.0) else "no solution"))
        else:
            xi = m ** (-1.0 / expo)
            if 0 < xi <= 1e6:
                states.append(_piecewise_state(model, grid, mask, xi ** (q / (p - 1)), xi, diag))
            else:
                diag.append(f"root xi={xi:g} outside (0, 1e6]")
    elif isinstance(model, Carcinogenesis):
        a, d, k0 = model.a, model.d, model.kappa0
        if a <= d:
            diag.append("a <= d: no positive piecewise-constant state")
        else:
            roots = _quadratic_roots(d * m, -k0 * (a - d), d)
            if not roots:
                diag.append("negative discriminant: kappa0^2 (a-d)^2 < 4 m d^2")
            for u in roots:
                if u > 0:
                    u = _newton_polish(lambda z: d * m * z * z - k0 * (a - d) * z + d,
                                       lambda z: 2 * d * m * z - k0 * (a - d), u)
                    states.append(_piecewise_state(model, grid, mask, u, d / ((a - d) * u), diag))
    else:
        raise NotImplementedError("piecewise steady states are built only for the built-in models")

    kept = []
    for st in states:
        if st.residual_f <= RESIDUAL_TOL and st.residual_g <= RESIDUAL_TOL:
            kept.append(st)
        else:
            diag.append(f"discarded state u_bar={st.u_bar:g}: residuals {st.residual_f:.2e}, {st.residual_g:.2e}")
    return kept, diag


def _trivial_designation(model, u_bar, xi_bar, mask_is_full):
    if u_bar != 0.0 or not mask_is_full:
        return False
    if isinstance(model, GrayScott):
        return xi_bar == 1.0
    if isinstance(model, Carcinogenesis):
        return xi_bar == model.kappa0
    return False


def classify_shadow_stability(model, steady: SteadyState, grid: SpatialGrid | None = None) -> str:
    """Stability label of a stationary solution of the shadow problem.

    A state is ``unstable-autocatalytic`` when ``f_u > 0`` on some constant
    piece of positive measure.  The zero states ``(0, 1)`` (Gray-Scott) and
    ``(0, kappa0)`` (carcinogenesis) are ``trivial-stable``.  Anything else is
    ``inconclusive``.
    """
    if steady.mask is None:
        pieces = [steady.u_bar]
        full = True
    else:
        mask = np.asarray(steady.mask, dtype=bool)
        weights = grid.weights if grid is not None else np.full(mask.size, 1.0 / mask.size)
        pieces = []
        if weights[mask].sum() > 0:
            pieces.append(steady.u_bar)
        if weights[~mask].sum() > 0:
            pieces.append(0.0)
        full = False
    if _trivial_designation(model, steady.u_bar, steady.xi_bar, full):
        return TRIVIAL_STABLE
    for val in pieces:
        if eval_partials(model, val, steady.xi_bar)[0] > 0:
            return UNSTABLE_AUTOCATALYTIC
    return INCONCLUSIVE


def autocatalysis_rate(model, steady: SteadyState) -> float:
    """``f_u(u_bar, xi_bar)``; the unstable eigenvalue when positive."""
    return eval_partials(model, steady.u_bar, steady.xi_bar)[0]


def linearized_operator(model, grid: SpatialGrid, steady: SteadyState, w, eta: float = 0.0):
    """Apply the linearization at ``steady`` to the perturbation ``(w, eta)``."""
    U = steady.U if steady.mask is not None else np.full(grid.n_cells, steady.u_bar)
    f_u, f_xi, g_u, g_xi = model.partials(np.asarray(U, dtype=float), steady.xi_bar)
    f_u, f_xi, g_u, g_xi = (np.broadcast_to(v, (grid.n_cells,)) for v in (f_u, f_xi, g_u, g_xi))
    top = f_u * w + f_xi * eta
    bottom = quadrature(grid, g_u * w) + quadrature(grid, g_xi) * eta
    return top, bottom


def eigenpair_residual(model, grid: SpatialGrid, steady: SteadyState, w0) -> float:
    """Sup-norm residual of ``L (w0, 0) = lambda0 (w0, 0)`` with ``lambda0 = f_u``.

    ``w0`` must vanish off the constant piece and have zero integral over it.
    """
    w0 = check_field(grid, w0)
    support = np.ones(grid.n_cells, bool) if steady.mask is None else np.asarray(steady.mask, bool)
    scale = max(1.0, float(np.max(np.abs(w0))))
    if not np.any(w0 != 0):
        raise InvalidEigenvectorError("w0 is identically zero")
    if np.any(w0[~support] != 0):
        raise InvalidEigenvectorError("w0 must vanish outside the constant piece")
    mean = quadrature(grid, np.where(support, w0, 0.0))
    if abs(mean) > 1e-12 * scale:
        raise InvalidEigenvectorError(f"w0 must have zero integral over the constant piece (got {mean:.3e})")
    lam = autocatalysis_rate(model, steady)
    top, bottom = linearized_operator(model, grid, steady, w0, 0.0)
    return float(max(np.max(np.abs(top - lam * w0)), abs(bottom)))
