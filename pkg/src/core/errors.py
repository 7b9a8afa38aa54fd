# errors.py
from typing import Optional


class EngineError(Exception):
    """Base error carrying a process exit code and a human readable detail."""

    exit_code: int = 3

    def __init__(self, detail: str, exit_code: Optional[int] = None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code

    def __str__(self) -> str:
        return self.detail


class ConfigurationError(EngineError):
    """Config parse failures and violated model invariants."""

    exit_code = 2


class ComputationError(EngineError):
    exit_code = 3


class TruncationError(ComputationError):
    """Raised when a result would depend on coefficients beyond the known window."""

    def __init__(self, detail: str, required_order: Optional[int] = None):
        super().__init__(detail)
        self.required_order = required_order


class DegenerateCurveError(ComputationError):
    pass


class UnsupportedCurveError(ComputationError):
    pass


class CurveAssumptionError(ComputationError):
    pass


class PadeError(ComputationError):
    """Degree bounds too small or guard coefficients not reproduced."""


class LogTermError(ComputationError):
    pass


class PartitionBoundError(ComputationError):
    pass
