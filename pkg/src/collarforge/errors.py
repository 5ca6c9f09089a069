"""Exception hierarchy.

Each class carries the CLI exit code it maps to, so the command line layer
never has to guess.
"""


class CollarForgeError(Exception):
    exit_code = 1


class InadmissibleDataError(CollarForgeError):
    """Boundary data fails the strict curvature inequality of the requested mode."""

    exit_code = 1

    def __init__(self, message, admissibility=None):
        super().__init__(message)
        self.admissibility = admissibility


class ConvergenceError(CollarForgeError):
    """A numerical procedure did not reach its tolerance."""

    exit_code = 2

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class MalformedInputError(CollarForgeError, ValueError):
    exit_code = 3


class InequalityViolation(CollarForgeError):
    """ADM mass below a lower bound whose hypotheses were enforced.

    Never expected in a correct build; treated as a bug sentinel.
    """

    exit_code = 4

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report or {}


class CornerConditionError(CollarForgeError):
    """H_minus < H_plus somewhere on the gluing surface, or metrics do not match."""

    exit_code = 1


class SingularMetricError(CollarForgeError, ValueError):
    """A metric sample with nonpositive lapse or warp."""

    exit_code = 3
