"""Exception hierarchy shared by all modules.

Every error carries a machine-readable ``code`` and the process exit code the
CLI maps it to (2 for validation problems, 3 for exceeded enumeration caps).
"""


class QDoubleError(Exception):
    code = "error"
    exit_code = 2


class ValidationError(QDoubleError):
    code = "validation_error"


class CapExceeded(QDoubleError):
    code = "cap_exceeded"
    exit_code = 3


class NoSolution(QDoubleError):
    code = "no_solution"


class NotRational(QDoubleError):
    code = "not_rational"


class NotACocycle(ValidationError):
    code = "not_a_cocycle"


class NotAbelian(ValidationError):
    code = "not_abelian"


class NotQuadratic(ValidationError):
    code = "not_quadratic"


class Degenerate(ValidationError):
    code = "degenerate"


class SnapAmbiguous(QDoubleError):
    code = "snap_ambiguous"


class NotOddPrime(ValidationError):
    code = "not_odd_prime"


class SingularGram(ValidationError):
    code = "singular_gram"


class NotSelfDual(ValidationError):
    code = "not_self_dual"


class NotEven(ValidationError):
    code = "not_even"


class ConstructionFailed(QDoubleError):
    code = "construction_failed"


class CheckFailed(QDoubleError):
    """An internal certification failed; indicates a bug, never user error."""

    code = "check_failed"
