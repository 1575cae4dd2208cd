"""Exception types shared across modules."""


class BudgetExceededError(RuntimeError):
    """A brute-force enumeration would exceed its configured size budget."""
