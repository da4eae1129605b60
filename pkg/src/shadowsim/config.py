"""Run specifications and their flat ``key = value`` text format.

A document holds one assignment per line with dotted keys; ``#`` starts a
comment.  Example::

    command = simulate
    model.name = carcinogenesis
    model.a = 2
    grid.n = 512
    init.u0 = "8-0.05*(cos(2*pi*x)+0.25*(1-x))"
    init.xi0 = 0.125
    run.t_end = 20

``figure = N`` loads a figure preset first; keys given alongside it override
the preset.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace

from .errors import ConfigError, ConstraintError
from .expr import Expression
from .kinetics import ActivatorInhibitor, Carcinogenesis, GrayScott
from .monitors import MONITOR_TAGS

__all__ = ["RunSpec", "FigurePreset", "FIGURES", "parse_config", "serialize_config", "build_model", "apply_override"]

COMMANDS = ("simulate", "kinetics", "steady", "certify", "limit", "sweep", "figure")

MODEL_CLASSES = {
    "gray_scott": GrayScott,
    "activator_inhibitor": ActivatorInhibitor,
    "carcinogenesis": Carcinogenesis,
}
MODEL_DEFAULTS = {
    "gray_scott": {"B": 1.0, "k": 0.1},
    "activator_inhibitor": {"p": 2.0, "q": 1.0, "r": 2.0, "s": 0.0, "tau": 0.5},
    "carcinogenesis": {"a": 2.0, "d": 1.0, "kappa0": 65.0 / 8.0},
}


@dataclass(frozen=True)
class FigurePreset:
    id: int
    u0: str
    t_end: float
    xi0: float = 0.125
    n: int = 512
    params: tuple = (("a", 2.0), ("d", 1.0), ("kappa0", 65.0 / 8.0))


FIGURES = {
    1: FigurePreset(1, "8-0.05*(cos(2*pi*x)+0.25*(1-x))", 20.0),
    2: FigurePreset(2, "8+0.05*sin(3*pi*x)*(1+0.1*x)", 12.0),
    3: FigurePreset(3, "8+0.05*sin(3*pi*x)", 12.0),
    4: FigurePreset(4, "piecewise(0.25<=x<=0.75, 8, 8-0.05*sin(2*pi*x+0.5*pi))", 12.0),
}


@dataclass(frozen=True)
class RunSpec:
    """Everything needed to execute one command."""

    command: str = "simulate"
    model: str = "carcinogenesis"
    params: tuple = tuple(MODEL_DEFAULTS["carcinogenesis"].items())
    n: int = 512
    u0: str = "8"
    xi0: float = 0.125
    v0: str | None = None
    figure: int | None = None
    t_end: float = 10.0
    dt_init: float = 1e-2
    dt_min: float = 1e-12
    rel_tol: float = 1e-8
    blowup_threshold: float = 1e8
    sample_every: float = 0.1
    monitors: tuple = ()
    lam: float | None = None
    singular_nodes: tuple = ()
    D_list: tuple = (100.0, 1000.0, 10000.0)
    alpha: float = 0.25
    T: float = 2.0
    sweep_command: str = "simulate"
    sweep_axis: str | None = None
    sweep_values: tuple = ()
    steady_mask: str | None = None
    out_dir: str = "."
    prefix: str = "run"
    extra: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def param_dict(self) -> dict:
        return dict(self.params)


def build_model(spec: RunSpec):
    """Instantiate the kinetics named by ``spec``; constraint errors propagate."""
    return MODEL_CLASSES[spec.model](**spec.param_dict)


# key -> (field name, parser, formatter)
def _float(text):
    return float(text)


def _int(text):
    value = float(text)
    if value != int(value):
        raise ValueError(f"{text!r} is not an integer")
    return int(value)


def _opt_float(text):
    return None if text.lower() in ("", "none") else float(text)


def _opt_int(text):
    return None if text.lower() in ("", "none") else _int(text)


def _opt_str(text):
    return None if text.lower() in ("", "none") else text


def _float_list(text):
    return tuple(float(t) for t in text.split(",") if t.strip())


def _int_list(text):
    return tuple(_int(t) for t in text.split(",") if t.strip())


def _str_list(text):
    return tuple(t.strip() for t in text.split(",") if t.strip())


def _fmt(value):
    if value is None:
        return "none"
    if isinstance(value, tuple):
        return ",".join(_fmt(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _fmt_str(value):
    return "none" if value is None else '"' + value + '"'


_KEYS = {
    "command": ("command", str, _fmt),
    "model.name": ("model", str, _fmt),
    "grid.n": ("n", _int, _fmt),
    "init.u0": ("u0", str, _fmt_str),
    "init.xi0": ("xi0", _float, _fmt),
    "init.v0": ("v0", _opt_str, _fmt_str),
    "figure": ("figure", _opt_int, _fmt),
    "run.t_end": ("t_end", _float, _fmt),
    "run.dt_init": ("dt_init", _float, _fmt),
    "run.dt_min": ("dt_min", _float, _fmt),
    "run.rel_tol": ("rel_tol", _float, _fmt),
    "run.blowup_threshold": ("blowup_threshold", _float, _fmt),
    "run.sample_every": ("sample_every", _float, _fmt),
    "run.monitors": ("monitors", _str_list, _fmt),
    "run.lambda": ("lam", _opt_float, _fmt),
    "run.singular_nodes": ("singular_nodes", _int_list, _fmt),
    "limit.D_list": ("D_list", _float_list, _fmt),
    "limit.alpha": ("alpha", _float, _fmt),
    "limit.T": ("T", _float, _fmt),
    "sweep.command": ("sweep_command", str, _fmt),
    "sweep.axis": ("sweep_axis", _opt_str, _fmt),
    "sweep.values": ("sweep_values", _float_list, _fmt),
    "steady.mask": ("steady_mask", _opt_str, _fmt_str),
    "output.dir": ("out_dir", str, _fmt_str),
    "output.prefix": ("prefix", str, _fmt),
}
PARAM_KEYS = {f"model.{p}" for defaults in MODEL_DEFAULTS.values() for p in defaults}
SWEEPABLE = {k for k, (_, conv, _) in _KEYS.items() if conv in (_float, _int, _opt_float)} | PARAM_KEYS


def _unquote(text):
    text = text.strip()
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "\"'":
        return text[1:-1]
    return text


def _split_lines(text):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=lineno)
        key, value = line.split("=", 1)
        value = value.strip()
        if value[:1] not in "\"'" and "#" in value:
            value = value.split("#", 1)[0].strip()
        yield lineno, key.strip(), _unquote(value)


def preset_spec(figure_id: int, base: RunSpec | None = None) -> RunSpec:
    """Spec reproducing one of the four figure presets."""
    if figure_id not in FIGURES:
        raise ConfigError(f"unknown figure {figure_id}; choose 1-4", key="figure")
    p = FIGURES[figure_id]
    base = base or RunSpec()
    return replace(base, command="figure", model="carcinogenesis", params=p.params, n=p.n,
                   u0=p.u0, xi0=p.xi0, t_end=p.t_end, figure=figure_id,
                   monitors=("carc-apriori", "carc-mass"), prefix=f"figure{figure_id}")


def apply_override(spec: RunSpec, key: str, value: str, lineno=None) -> RunSpec:
    """Return ``spec`` with one ``key = value`` assignment applied."""
    if key in PARAM_KEYS or (key.startswith("model.") and key != "model.name"):
        name = key.split(".", 1)[1]
        if name not in MODEL_DEFAULTS[spec.model]:
            raise ConfigError(f"parameter {name!r} does not belong to model {spec.model!r}", line=lineno, key=key)
        try:
            number = float(value)
        except ValueError:
            raise ConfigError(f"expected a number, got {value!r}", line=lineno, key=key) from None
        params = dict(spec.params)
        params[name] = number
        return replace(spec, params=tuple(params.items()))
    if key not in _KEYS:
        raise ConfigError("unknown key", line=lineno, key=key)
    name, conv, _ = _KEYS[key]
    try:
        parsed = conv(value)
    except ValueError as exc:
        raise ConfigError(str(exc), line=lineno, key=key) from None
    if key == "model.name":
        if parsed not in MODEL_CLASSES:
            raise ConfigError(f"unknown model {parsed!r}; choose from {sorted(MODEL_CLASSES)}", line=lineno, key=key)
        if parsed != spec.model:
            return replace(spec, model=parsed, params=tuple(MODEL_DEFAULTS[parsed].items()))
        return spec
    if key == "figure" and parsed is not None:
        return preset_spec(parsed, spec)
    if key in ("command", "sweep.command") and parsed not in COMMANDS:
        raise ConfigError(f"unknown command {parsed!r}", line=lineno, key=key)
    if key == "run.monitors":
        for tag in parsed:
            if tag not in MONITOR_TAGS:
                raise ConfigError(f"unknown monitor {tag!r}", line=lineno, key=key)
    if key in ("init.u0", "init.v0", "steady.mask") and parsed is not None:
        try:
            Expression(parsed)
        except ValueError as exc:
            raise ConfigError(str(exc), line=lineno, key=key) from None
    if key == "sweep.axis" and parsed is not None and parsed not in SWEEPABLE:
        raise ConfigError(f"cannot sweep over {parsed!r}", line=lineno, key=key)
    return replace(spec, **{name: parsed})


def validate(spec: RunSpec) -> RunSpec:
    """Check cross-field constraints; model constraints raise :class:`ConstraintError`."""
    build_model(spec)
    if spec.n < 2:
        raise ConstraintError("grid.n>=2 required")
    for name in ("t_end", "dt_init", "dt_min", "rel_tol", "sample_every", "T"):
        if not getattr(spec, name) > 0:
            raise ConstraintError(f"{name}>0 required")
    if spec.dt_min > spec.dt_init:
        raise ConstraintError("run.dt_min<=run.dt_init required")
    if not spec.blowup_threshold > 1:
        raise ConstraintError("run.blowup_threshold>1 required")
    if not 0 < spec.alpha < 0.5:
        raise ConstraintError("0<limit.alpha<1/2 required")
    if spec.xi0 < 0 or (spec.model == "activator_inhibitor" and spec.xi0 <= 0):
        raise ConstraintError("xi0>0 required" if spec.model == "activator_inhibitor" else "xi0>=0 required")
    if spec.command == "sweep" and spec.sweep_axis is None and spec.sweep_values:
        raise ConstraintError("sweep.axis required when sweep.values is given")
    return spec


def parse_config(text: str, overrides=()) -> RunSpec:
    """Parse a configuration document into a validated :class:`RunSpec`.

    ``overrides`` is a sequence of ``(key, value)`` pairs applied after the
    document (command-line flags).
    """
    spec = RunSpec()
    entries = list(_split_lines(text))
    # model.name and figure first, so parameter keys resolve against the
    # final model and explicit keys override presets
    order = {"figure": 0, "model.name": 1}
    entries.sort(key=lambda e: order.get(e[1], 2))
    seen = set()
    for lineno, key, value in entries:
        if key in seen:
            raise ConfigError("duplicate key", line=lineno, key=key)
        seen.add(key)
        spec = apply_override(spec, key, value, lineno)
    for key, value in overrides:
        spec = apply_override(spec, key, value)
    return validate(spec)


def serialize_config(spec: RunSpec) -> str:
    """Text document that parses back to ``spec``."""
    lines = []
    for key, (name, _, fmt) in _KEYS.items():
        if key == "figure":
            continue
        lines.append(f"{key} = {fmt(getattr(spec, name))}")
        if key == "model.name":
            for pname, pval in spec.params:
                lines.append(f"model.{pname} = {_fmt(float(pval))}")
    # figure is emitted last with no effect on other fields when re-parsed:
    # parse applies it first and explicit keys then override it
    if spec.figure is not None:
        lines.insert(0, f"figure = {spec.figure}")
    return "\n".join(lines) + "\n"
