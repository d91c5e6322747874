"""Exception hierarchy.

Every error carries an exit code so the CLI can map failures without a
lookup table: 2 for configuration problems, 3 for exceeded budgets and
4 for violated invariants.
"""


class BigraphError(Exception):
    exit_code = 4


class ConfigError(BigraphError):
    exit_code = 2


class BudgetExceeded(BigraphError):
    exit_code = 3


class InvariantError(BigraphError):
    exit_code = 4


class RamifiedPrime(ConfigError):
    pass


class InvalidPrime(ConfigError):
    pass


class BadParams(ConfigError):
    pass


class NotUnitaryShape(ConfigError):
    pass


class ShapeMismatch(ConfigError):
    pass


class OutOfRange(ConfigError):
    pass


class ZeroElement(ConfigError):
    pass


class Oversize(BudgetExceeded):
    pass


class PartitionShapeError(InvariantError):
    pass


class DegenerateColor(InvariantError):
    pass


class AxiomViolation(InvariantError):
    pass


class Acyclic(InvariantError):
    pass


class RankMismatch(InvariantError):
    pass


class CountMismatch(InvariantError):
    pass


class SpectralIntegerMismatch(InvariantError):
    pass
