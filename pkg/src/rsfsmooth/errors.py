"""Exception types shared across the package.

The CLI maps these onto exit codes: bad inputs exit 3, numerical
failures exit 4.
"""


class DataError(ValueError):
    """Invalid input data: malformed files, infeasible parameters, size limits."""


class NumericalError(RuntimeError):
    """Numerical failure: solver non-convergence, exhausted step budgets."""
