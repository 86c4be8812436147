"""Exception types shared across the package."""


class LabError(Exception):
    """Base class for all errors raised by lambdalab."""


class DomainError(LabError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class CapacityError(LabError, RuntimeError):
    """A request is well posed but exceeds a configured size cap."""


class ConstructionError(LabError, ValueError):
    """A combinatorial or algebraic object could not be built."""
