from typing import Optional


class SystolicError(Exception):
    """Base class for every error raised by the toolkit"""
    exit_code: int = 2


class InputError(SystolicError):
    """Malformed input file, schema violation or unparsable expression"""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class DegenerateLatticeError(SystolicError):
    """Singular basis or a Gram matrix that is not symmetric positive definite"""


class IllConditionedError(SystolicError):
    """Gram matrix too close to singular to invert reliably"""

    def __init__(self, condition: float, limit: float):
        super().__init__(f"Gram matrix condition number {condition:.3e} exceeds {limit:.3e}")
        self.condition = condition


class CapacityError(SystolicError):
    """Enumeration requested above the configured dimension cap"""


class DomainError(SystolicError):
    """Argument outside the mathematical domain of an operation"""


class ResolutionError(SystolicError):
    """Mesh resolution below the supported minimum"""


class PreconditionError(SystolicError):
    """Operation called on data that failed its validation step"""


class ReconstructionError(SystolicError):
    """Edge data that does not reconstruct to a single covector per face"""
    exit_code = 1

    def __init__(self, residual: float, tolerance: float):
        super().__init__(f"Edge data is not closed: face residual {residual:.3e} > {tolerance:.1e}")
        self.residual = residual


class NumericalError(SystolicError):
    """Linear solve did not reach the requested residual"""
    exit_code = 1

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message}: residual {residual:.3e}")
        self.residual = residual
