"""Exception hierarchy.

Validation problems (bad input, infeasible data) derive from
:class:`ValidationError`; failures while computing derive from
:class:`NumericalError`. The CLI maps the two families to exit codes 1 and 2.
"""


class VascnetError(Exception):
    """Base class for all package errors."""


class ValidationError(VascnetError):
    pass


class NumericalError(VascnetError):
    pass


class InvalidInputError(ValidationError, ValueError):
    pass


class DomainError(ValidationError, ValueError):
    """Argument outside the domain of a function (e.g. non-positive density)."""


class InfeasibleBoundaryDataError(ValidationError):
    """No wall density reproduces the requested wall concentration."""


class PerturbationTooLargeError(ValidationError):
    """Initial density would touch vacuum."""

    def __init__(self, min_density):
        self.min_density = float(min_density)
        super().__init__(
            f"perturbation-too-large: initial density reaches {self.min_density:.6g} <= 0"
        )


class ConfigError(ValidationError):
    """One or more configuration problems, all reported together."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.problems))


class ParseError(ValidationError):
    def __init__(self, message, line=None):
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{message}{where}")


class LawEvaluationError(NumericalError):
    pass


class HyperbolicityLossError(NumericalError):
    pass


class VacuumError(NumericalError):
    def __init__(self, cell, time, value):
        self.cell = int(cell)
        self.time = float(time)
        self.value = float(value)
        super().__init__(
            f"vacuum: density {self.value:.6g} in cell {self.cell} at t={self.time:.6g}"
        )


class WindowTooShortError(NumericalError):
    pass


class NumericalFailure(NumericalError):
    pass
