"""Exception hierarchy shared across the package."""


class PlateRodError(Exception):
    """Base class for all package errors."""


class DomainError(PlateRodError, ValueError):
    """An argument lies outside its mathematical domain."""


class RegimeError(DomainError):
    """Scaling exponents outside the admissible range (kappa, kappa' >= 3)."""


class ContractError(PlateRodError, ValueError):
    """A documented precondition on an input was violated."""


class ConstraintError(PlateRodError, ValueError):
    """Clamped or junction conditions are not satisfied."""


class MeshError(PlateRodError, ValueError):
    pass


class BoundaryError(PlateRodError, ValueError):
    """The clamped boundary is empty, so the problem is not well posed."""


class FactorizationError(PlateRodError, ArithmeticError):
    pass


class WrongRegimeError(PlateRodError, ValueError):
    pass


class MatchingError(PlateRodError, ValueError):
    """Recovery deformation requested with delta (or eps) larger than 1/n."""


class ConfigError(PlateRodError, ValueError):
    """Configuration failed validation. ``errors`` lists every problem found."""

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))
