"""Error types shared across the attack engine."""


class AttackError(Exception):
    """Base class for all errors raised by this package."""


class BudgetExhaustedError(AttackError):
    """Raised when a query is requested after the ledger budget is spent."""


class DimensionMismatchError(AttackError):
    """Image dimensionality does not match what the oracle expects."""


class RemoteProtocolError(AttackError):
    """Transport failure or malformed frame on the remote oracle channel."""


class HandshakeMismatchError(RemoteProtocolError):
    """Remote server advertised a model shape different from the configured one."""


class InitFailedError(AttackError):
    """No adversarial starting direction found at full perturbation strength."""


class DatasetFormatError(AttackError):
    """Dataset container is malformed or violates its declared header."""


class EmptyDatasetError(AttackError):
    """Dataset contains no records, so there is nothing to attack."""
