"""Exception hierarchy shared across the package."""


class SpinorZetaError(Exception):
    """Base class for all package errors."""


class ValidationError(SpinorZetaError, ValueError):
    """Input data or configuration violates a contract."""


class TableTooSmallError(ValidationError):
    """A requested argument lies beyond the bound of a coefficient table."""


class MissingPrimeError(ValidationError):
    def __init__(self, p: int):
        super().__init__(f"no local factor for prime {p}")
        self.p = p


class DataFormatError(ValidationError):
    def __init__(self, message: str, path=None, line: int | None = None):
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)
        self.path = path
        self.line = line


class AccuracyError(SpinorZetaError, ArithmeticError):
    """A numerical procedure could not reach its accuracy target."""


class RootFindingError(AccuracyError):
    def __init__(self, coeffs, residual: float):
        super().__init__(
            f"root recovery failed for t^4 - e1 t^3 + e2 t^2 - e1 t + 1 with "
            f"coefficients {tuple(coeffs)} (residual {residual:.3e})"
        )
        self.coeffs = tuple(coeffs)
        self.residual = residual


class InsufficientDataError(AccuracyError):
    pass
