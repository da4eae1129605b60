"""Run-time checks of the a-priori inequalities proved for each model.

A monitor is built once per run from the initial data and is then called at
every sample with the current ``(t, u, xi)``.  Each call returns one
:class:`MonitorRecord` per inequality, reporting the worst node.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .kinetics import ActivatorInhibitor, Carcinogenesis, GrayScott

__all__ = ["MonitorRecord", "build_monitors", "MONITOR_TAGS", "DEFAULT_MONITORS"]

ABS_FLOOR = 1e-12


@dataclass(frozen=True)
class MonitorRecord:
    tag: str
    t: float
    lhs: float
    rhs: float
    passed: bool

    def as_row(self):
        return (self.tag, self.t, self.lhs, self.rhs, self.passed)


def _le(tag, t, lhs, rhs, tol):
    """Record for ``lhs <= rhs`` with relative slack ``tol``.

    ``lhs`` and ``rhs`` may be arrays; the entry with the largest relative
    excess is reported.
    """
    lhs = np.atleast_1d(np.asarray(lhs, dtype=float))
    rhs = np.broadcast_to(np.asarray(rhs, dtype=float), lhs.shape)
    if lhs.size == 0:
        return MonitorRecord(tag, t, 0.0, 0.0, True)
    scale = np.maximum(np.abs(lhs), np.abs(rhs))
    excess = (lhs - rhs) / (scale + ABS_FLOOR)
    with np.errstate(invalid="ignore"):
        excess = np.where(np.isnan(excess), np.inf, excess)
    i = int(np.argmax(excess))
    ok = bool(lhs[i] <= rhs[i] + tol * scale[i] + ABS_FLOOR)
    return MonitorRecord(tag, float(t), float(lhs[i]), float(rhs[i]), ok)


def _ge(tag, t, lhs, rhs, tol):
    rec = _le(tag, t, -np.asarray(lhs, dtype=float), -np.asarray(rhs, dtype=float), tol)
    return MonitorRecord(rec.tag, rec.t, -rec.lhs, -rec.rhs, rec.passed)


class Monitor:
    tag = ""

    def __init__(self, tol):
        self.tol = tol

    def __call__(self, t, u, xi):
        raise NotImplementedError


class GSXiBand(Monitor):
    tag = "gs-xi-band"

    def __init__(self, tol, xi0):
        super().__init__(tol)
        self.upper = max(xi0, 1.0)

    def __call__(self, t, u, xi):
        return [_ge(self.tag + ":lower", t, xi, 0.0, self.tol),
                _le(self.tag + ":upper", t, xi, self.upper, self.tol)]


class GSBlowupEnvelope(Monitor):
    tag = "gs-blowup-envelope"

    def __init__(self, tol, model, u0, xi0, x_star, A0):
        super().__init__(tol)
        self.rate = model.decay
        peak = u0[x_star]
        others = np.ones(u0.size, bool)
        others[x_star] = False
        self.others = others
        self.coef = peak * u0[others] / (peak - u0[others])
        self.xi_low = min(xi0, model.B / (A0 + model.B))
        self.xi_high = max(xi0, 1.0)

    def __call__(self, t, u, xi):
        env = self.coef * np.exp(-t * self.rate)
        return [_le(self.tag + ":u", t, u[self.others], env, self.tol),
                _ge(self.tag + ":xi-lower", t, xi, self.xi_low, self.tol),
                _le(self.tag + ":xi-upper", t, xi, self.xi_high, self.tol)]


class AIXiFloor(Monitor):
    tag = "ai-xi-floor"

    def __init__(self, tol, model, xi0):
        super().__init__(tol)
        self.xi0, self.tau = xi0, model.tau

    def __call__(self, t, u, xi):
        return [_ge(self.tag, t, xi, self.xi0 * np.exp(-t / self.tau), self.tol)]


class CarcApriori(Monitor):
    tag = "carc-apriori"

    def __init__(self, tol, model, u0, xi0):
        super().__init__(tol)
        self.u0 = u0
        self.growth = model.a - model.d
        self.xi_high = max(xi0, model.kappa0)

    def __call__(self, t, u, xi):
        return [_ge(self.tag + ":u-lower", t, u, 0.0, self.tol),
                _le(self.tag + ":u-upper", t, u, np.exp(self.growth * t) * self.u0, self.tol),
                # strict positivity of xi, checked as xi >= 0 with a strict flag
                MonitorRecord(self.tag + ":xi-lower", float(t), float(xi), 0.0, bool(xi > 0)),
                _le(self.tag + ":xi-upper", t, xi, self.xi_high, self.tol)]


class CarcMass(Monitor):
    tag = "carc-mass"

    def __init__(self, tol, model, weights, u0, xi0):
        super().__init__(tol)
        self.w, self.a = weights, model.a
        start = float(weights @ u0) + model.a * xi0
        self.bound = max(start, model.a * model.kappa0 / min(1.0, model.d))

    def __call__(self, t, u, xi):
        return [_le(self.tag, t, float(self.w @ u) + self.a * xi, self.bound, self.tol)]


class CarcLemmaInvariant(Monitor):
    tag = "carc-lemma-invariant"

    def __init__(self, tol, model, weights, lam):
        super().__init__(tol)
        self.w = weights
        self.low = lam * model.kappa0
        self.high = (1.0 - lam) * model.kappa0

    def __call__(self, t, u, xi):
        return [_ge(self.tag + ":product", t, xi * float(self.w @ (u * u)), self.low, self.tol),
                _le(self.tag + ":xi-upper", t, xi, self.high, self.tol)]


class CarcMaxFloor(Monitor):
    tag = "carc-max-floor"

    def __init__(self, tol, weights, u0):
        super().__init__(tol)
        self.w = weights
        self.top = np.flatnonzero(u0 == u0.max())

    def __call__(self, t, u, xi):
        l2 = float(self.w @ (u * u))
        peak = float(np.max(u[self.top]))
        return [_ge(self.tag + ":peak", t, peak * peak, l2, self.tol),
                _ge(self.tag + ":unit", t, l2, 1.0, self.tol)]


class CarcRatioMonotone(Monitor):
    """``u(x, t) / u(x*, t)`` must not increase where ``u0(x) < u0(x*)``."""

    tag = "carc-ratio-monotone"

    def __init__(self, tol, u0):
        super().__init__(tol)
        self.star = int(np.argmax(u0))
        self.below = np.flatnonzero(u0 < u0[self.star])
        self.prev = None

    def __call__(self, t, u, xi):
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = u[self.below] / u[self.star]
        ratio = np.nan_to_num(ratio, nan=0.0)
        if self.prev is None:
            rec = MonitorRecord(self.tag, float(t), 0.0, 0.0, True)
        else:
            rec = _le(self.tag, t, ratio, self.prev, self.tol)
        self.prev = ratio
        return [rec]


MONITOR_TAGS = (
    "gs-xi-band",
    "gs-blowup-envelope",
    "ai-xi-floor",
    "carc-apriori",
    "carc-mass",
    "carc-lemma-invariant",
    "carc-max-floor",
    "carc-ratio-monotone",
)

DEFAULT_MONITORS = {
    "gray_scott": ("gs-xi-band",),
    "activator_inhibitor": ("ai-xi-floor",),
    "carcinogenesis": ("carc-apriori", "carc-mass"),
}

_REQUIRED_MODEL = {
    "gs-": GrayScott,
    "ai-": ActivatorInhibitor,
    "carc-": Carcinogenesis,
}


def build_monitors(tags, model, weights, u0, xi0, params=None, tol=1e-8):
    """Instantiate the monitors named in ``tags``.

    ``params`` supplies extra constants: ``lambda`` for the carcinogenesis
    lemma invariant, ``x_star`` and ``A0`` for the Gray-Scott envelope (computed
    from ``u0`` when absent).
    """
    params = dict(params or {})
    u0 = np.asarray(u0, dtype=float)
    weights = np.asarray(weights, dtype=float)
    out = []
    for tag in tags:
        if tag not in MONITOR_TAGS:
            raise InvalidInputError(f"unknown monitor tag {tag!r}")
        for prefix, cls in _REQUIRED_MODEL.items():
            if tag.startswith(prefix) and not isinstance(model, cls):
                raise InvalidInputError(f"monitor {tag!r} does not apply to model {model.name!r}")
        if tag == "gs-xi-band":
            out.append(GSXiBand(tol, xi0))
        elif tag == "gs-blowup-envelope":
            x_star = params.get("x_star")
            if x_star is None:
                x_star = int(np.argmax(u0))
            A0 = params.get("A0")
            if A0 is None:
                from .analytic import discrete_singular_mass

                A0 = discrete_singular_mass(model, weights, u0, x_star)
            out.append(GSBlowupEnvelope(tol, model, u0, xi0, int(x_star), float(A0)))
        elif tag == "ai-xi-floor":
            out.append(AIXiFloor(tol, model, xi0))
        elif tag == "carc-apriori":
            out.append(CarcApriori(tol, model, u0, xi0))
        elif tag == "carc-mass":
            out.append(CarcMass(tol, model, weights, u0, xi0))
        elif tag == "carc-lemma-invariant":
            out.append(CarcLemmaInvariant(tol, model, weights, params.get("lambda", 0.5)))
        elif tag == "carc-max-floor":
            out.append(CarcMaxFloor(tol, weights, u0))
        elif tag == "carc-ratio-monotone":
            out.append(CarcRatioMonotone(tol, u0))
    return out
