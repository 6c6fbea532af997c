"""Exception hierarchy. ``exit_code`` is what the command-line front end returns."""


class MahlerError(Exception):
    exit_code = 1


class HypothesisError(MahlerError):
    """P and dP/dy share a zero over the unit circle."""

    exit_code = 2


class DegenerateInputError(MahlerError):
    """Zero polynomial, identically-zero substitution, shared factor, ..."""

    exit_code = 3


class ConvergenceError(MahlerError):
    """A numerical routine did not converge within its budget."""

    exit_code = 4

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class UndeterminedOrderError(ConvergenceError):
    """Every Re(b_k) up to kmax was below tolerance."""
