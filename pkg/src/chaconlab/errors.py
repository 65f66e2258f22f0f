"""Exceptions shared across the package.

Each maps to a CLI exit code (see cli.py):
  ConfigError  -> 2   bad parameters or flag combinations
  DomainError  -> 3   point outside the space, invalid digit, etc.
  BudgetError  -> 4   a computation refused to exceed its configured budget
"""


class ChaconError(Exception):
    pass


class ConfigError(ChaconError):
    pass


class DomainError(ChaconError):
    pass


class BudgetError(ChaconError):
    pass
