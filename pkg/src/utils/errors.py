"""
Exception Hierarchy

All library errors derive from RuijLabError so callers can catch the
package as a whole; the CLI maps the two main families to exit codes.
"""

from typing import Optional, Tuple


class RuijLabError(Exception):
    """Base class for all ruij-lab errors"""
    pass


class DomainError(RuijLabError, ValueError):
    """Argument lies outside the region where a formula or integral is valid"""
    pass


class NearPoleError(DomainError):
    """Evaluation point is within the singularity radius of a pole"""

    def __init__(self, message: str, info=None, index_pair: Optional[Tuple[int, int]] = None):
        super().__init__(message)
        self.info = info
        self.index_pair = index_pair


class ParameterError(DomainError):
    """Parameters violate a stated range or invariant"""
    pass


class SingularCoefficientError(DomainError):
    """A sine or sh denominator vanishes (coinciding coordinates)"""
    pass


class ToleranceError(RuijLabError, ArithmeticError):
    """Requested accuracy cannot be reached within the work limits"""
    pass


class NonFiniteError(ToleranceError):
    """Integrand produced NaN or infinity"""
    pass


class StrategyError(RuijLabError, ValueError):
    """Quadrature strategy is not allowed for the requested dimension"""
    pass
