"""Exception hierarchy shared across the package."""


class DomainError(ValueError):
    """An input is outside the mathematical domain of an operation."""


class PreconditionError(DomainError):
    """A declared relationship between inputs does not hold."""


class InputDataError(Exception):
    """External data (CSV rows, scenario files, fixtures) failed to parse
    or violates its schema. Messages carry the offending location."""
