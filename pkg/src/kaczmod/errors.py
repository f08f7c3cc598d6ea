"""Exception types shared across the library."""


class KaczmodError(Exception):
    """Base class for library errors."""


class DescriptorMismatchError(KaczmodError):
    """Operands live in different algebras or modules."""


class UnitVectorError(KaczmodError):
    """A sequence term fails the unit-vector requirement <e,e> = I."""


class SequenceExhaustedError(KaczmodError):
    """A non-periodic explicit sequence has no term at the requested index."""


class FrequencyOverflowError(KaczmodError):
    """Requested exponential index exceeds the module's frequency bound."""


class RankDeficiencyError(KaczmodError):
    """The finite frame operator is numerically singular."""

    def __init__(self, message, condition_number):
        super().__init__(f"{message} (condition number {condition_number:.3e})")
        self.condition_number = condition_number


class ConfigError(KaczmodError):
    """An experiment configuration failed to parse or validate."""
