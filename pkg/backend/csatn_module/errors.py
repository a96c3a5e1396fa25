"""
Exception hierarchy for the CSATN uplink analysis toolkit
"""

from typing import Optional, Tuple


class CsatnError(Exception):
    """Base class for every error raised by this package"""


class ConfigError(CsatnError):
    """Scenario configuration has error-class violations"""

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(f"{v.field}: {v.rule}" for v in self.violations)
        super().__init__(f"invalid scenario configuration: {lines}")


class DomainError(CsatnError, ValueError):
    """Argument outside the support of an operation"""


class QuadratureError(CsatnError):
    """Adaptive quadrature did not reach the requested tolerance"""

    def __init__(self, message: str, worst_interval: Optional[Tuple[float, float]] = None,
                 abs_error: Optional[float] = None):
        self.worst_interval = worst_interval
        self.abs_error = abs_error
        if worst_interval is not None:
            message = f"{message} (worst subinterval [{worst_interval[0]:.6g}, {worst_interval[1]:.6g}], est. error {abs_error:.3g})"
        super().__init__(message)


class SeriesConvergenceError(CsatnError):
    """A series expansion cannot converge for the given parameters"""


class ResampleBudgetError(CsatnError):
    """Rejection resampling exhausted its attempt budget"""

    def __init__(self, condition: str, attempts: int):
        self.condition = condition
        self.attempts = attempts
        super().__init__(f"resample budget exhausted after {attempts} attempts: {condition}")


class UnknownPresetError(CsatnError):
    """Sweep preset name is not registered"""


class ThresholdSearchError(CsatnError):
    """Target coverage is not bracketed on the searched threshold range"""


class OutputPathError(CsatnError):
    """Output location cannot be written"""
