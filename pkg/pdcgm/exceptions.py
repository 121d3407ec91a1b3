from typing import Optional

from pdcgm.constants import EXIT_INFEASIBLE, EXIT_NUMERICAL, EXIT_USAGE


class PDCGMError(Exception):
    """Base exception for solver errors"""
    exit_code = EXIT_NUMERICAL

    def __init__(self, message: str):
        self.message = message
        super().__init__(self.message)


class NumericalFailure(PDCGMError):
    """Raised when the interior point method breaks down or stalls"""
    pass


class DimensionMismatch(PDCGMError):
    """Raised when a point or vector does not fit the problem it is used with"""
    pass


class CycleDetected(PDCGMError):
    """Raised when the simplex method cycles despite Bland's rule"""
    pass


class EmptyMaster(PDCGMError):
    """Raised when a restricted master has neither columns nor an artificial"""
    pass


class MaxOuterExceeded(PDCGMError):
    """Raised when column generation hits its outer iteration limit"""
    pass


class MasterInfeasible(PDCGMError):
    """Raised when the artificial column still carries weight at exit"""
    exit_code = EXIT_INFEASIBLE


class OracleFailure(PDCGMError):
    """Raised when a pricing oracle cannot produce a result"""
    pass


class BadWeights(OracleFailure):
    """Raised when the quadratic oracle receives invalid kernel weights"""
    pass


class NegativeLength(OracleFailure):
    """Raised when a reduced arc length is negative"""
    pass


class Unreachable(OracleFailure):
    """Raised when a commodity sink cannot be reached from its source"""
    exit_code = EXIT_USAGE


class EmptyDualSet(PDCGMError):
    """Raised when a recourse problem is unbounded (its dual set is empty)"""
    exit_code = EXIT_INFEASIBLE


class InvalidInstance(PDCGMError):
    """Raised when instance data violates its invariants"""
    exit_code = EXIT_USAGE


class InstanceParseError(InvalidInstance):
    """Raised when an instance file cannot be parsed"""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
