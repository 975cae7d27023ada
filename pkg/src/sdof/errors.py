"""Exception types shared across the package.

Each class carries an ``exit_code`` used by the command-line front end.
"""


class SdofError(Exception):
    """Base class for every error raised by :mod:`sdof`."""

    exit_code = 4
    kind = "numerical_failure"

    def to_dict(self):
        return {"error": type(self).__name__, "kind": self.kind, "message": str(self),
                "exit_code": self.exit_code}


class InputError(SdofError, ValueError):
    """Malformed input: bad shapes, non-finite entries, schema violations."""

    exit_code = 2
    kind = "invalid_input"

    def __init__(self, message, kind=None):
        super().__init__(message)
        if kind is not None:
            self.kind = kind


class DimensionError(InputError):
    """Matrix or antenna dimensions are inconsistent."""

    kind = "dimension_mismatch"


class DegenerateChannelError(InputError):
    """A channel matrix is zero (or numerically zero) where a nonzero one is needed."""


class InfeasibleTargetError(SdofError, ValueError):
    """A requested s.d.o.f. target lies outside the region.

    Parameters
    ----------
    message : str
    violated : list of str, optional
        Human-readable labels of the violated facets.
    """

    exit_code = 3
    kind = "infeasible_target"

    def __init__(self, message, violated=()):
        super().__init__(message)
        self.violated = list(violated)

    def to_dict(self):
        d = super().to_dict()
        d["violated"] = self.violated
        return d


class PowerBudgetError(InfeasibleTargetError):
    """The power budget cannot cover the artificial-noise floor."""

    kind = "power_budget"

    def __init__(self, message, minimum_p_bar):
        super().__init__(message)
        self.minimum_p_bar = minimum_p_bar

    def to_dict(self):
        d = super().to_dict()
        d["minimum_p_bar"] = self.minimum_p_bar
        return d


class NumericalError(SdofError, ArithmeticError):
    """A factorization failed to converge or violated its own postconditions."""

    exit_code = 4
