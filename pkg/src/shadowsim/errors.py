"""Exception hierarchy shared by all shadowsim modules."""


class ShadowSimError(Exception):
    """Base class for every error raised by shadowsim."""


class InvalidGridError(ShadowSimError, ValueError):
    pass


class ShapeError(ShadowSimError, ValueError):
    pass


class InvalidInputError(ShadowSimError, ValueError):
    pass


class SingularKineticsError(ShadowSimError, ValueError):
    """Raised when a kinetic term is evaluated at a singular point (e.g. xi <= 0
    for the activator-inhibitor model)."""


class InvalidEigenvectorError(ShadowSimError, ValueError):
    pass


class NotApplicableError(ShadowSimError, ValueError):
    pass


class StepOverflow(ShadowSimError, ArithmeticError):
    """A time step produced non-finite values; the caller should shrink dt."""


class PastBlowupError(ShadowSimError, ArithmeticError):
    """The closed-form solution was evaluated beyond its blowup time.

    Attributes
    ----------
    crossing_time : float or None
        Time at which the denominator of the closed-form solution vanishes.
    """

    def __init__(self, message, crossing_time=None):
        super().__init__(message)
        self.crossing_time = crossing_time


class AlignmentError(ShadowSimError, ValueError):
    pass


class ConfigError(ShadowSimError, ValueError):
    """Malformed configuration document. ``line`` and ``key`` locate the problem."""

    def __init__(self, message, line=None, key=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key {key!r}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
        self.line = line
        self.key = key


class ConstraintError(ShadowSimError, ValueError):
    """A model or run parameter violates its admissible range."""
