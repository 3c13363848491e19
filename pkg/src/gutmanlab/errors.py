class DomainError(ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class EnumerationBudgetError(DomainError):
    """Exact type enumeration would exceed the configured cell budget."""


class AssumptionViolation(DomainError):
    """Inputs break a structural assumption, e.g. a non-unique nearest hypothesis."""
