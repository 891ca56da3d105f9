"""Exceptions shared across modules."""


class BudgetError(RuntimeError):
    """A quadrature or sampling budget is too small for the requested accuracy."""
