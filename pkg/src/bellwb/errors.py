"""Exception types shared across the package."""


class BudgetExceededError(RuntimeError):
    """A computation would exceed its documented size guard."""


class StateFormatError(ValueError):
    """A state file is malformed or does not describe a density matrix."""
