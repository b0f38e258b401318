"""Exception hierarchy shared by all modules."""


class NormAddError(Exception):
    """Base class for every error raised by this package."""


class InvalidInput(NormAddError, ValueError):
    """Malformed construction arguments or serialized data."""


class SpaceMismatch(NormAddError, ValueError):
    pass


class NegativeScalar(NormAddError, ValueError):
    pass


class EmptyList(NormAddError, ValueError):
    pass


class BadWidths(NormAddError, ValueError):
    pass


class NotInCone(NormAddError, ValueError):
    """A function takes a negative value, or does not vanish at infinity."""


class IncompatibleSpaces(NormAddError, ValueError):
    pass


class BadRange(NormAddError, ValueError):
    pass


class OracleFailure(NormAddError):
    """The black-box map raised while being evaluated."""


class CannotSampleDisjoint(NormAddError):
    pass


class RecoveryError(NormAddError):
    """Base class for failures of the structure-recovery procedure."""

    refutes = False


class NotLocalizable(RecoveryError):
    def __init__(self, reason, y, detail=""):
        self.reason = reason  # "zero" or "multiple"
        self.y = y
        self.refutes = reason == "multiple"
        msg = f"cannot localize tau({y!r}): {reason}"
        super().__init__(msg + (f" ({detail})" if detail else ""))


class BudgetExhausted(RecoveryError):
    pass


class WeightZero(RecoveryError):
    refutes = True


class WeightUnstable(RecoveryError):
    refutes = True


class TauNotBijective(RecoveryError):
    refutes = True


class TooLarge(NormAddError, ValueError):
    pass
