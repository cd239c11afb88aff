"""Exception types raised across the package."""


class ProfilePrivError(Exception):
    """Base class for all package errors."""


class GraphValidationError(ProfilePrivError, ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("invalid profile graph: " + "; ".join(self.violations))


class DomainError(ProfilePrivError, ValueError):
    """A parameter is outside the domain an operation accepts."""


class DimensionMismatch(ProfilePrivError, ValueError):
    """Shapes of mechanisms, graphs or post-processing maps disagree."""


class NumericalFailure(ProfilePrivError, RuntimeError):
    """The LP solver or a post-solve check failed numerically."""


class UncertifiedComposition(ProfilePrivError):
    """Raised for composition settings that carry no privacy guarantee."""
