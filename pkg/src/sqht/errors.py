"""Exception types raised across the package."""


class SqhtError(Exception):
    """Base class for all package errors."""


class ValidationError(SqhtError, ValueError):
    """An input object violates a named invariant.

    The ``invariant`` attribute carries a short name (for example
    ``"trace"`` or ``"full support"``) so callers can report which check
    failed.
    """

    def __init__(self, invariant, detail=""):
        self.invariant = invariant
        self.detail = detail
        msg = invariant if not detail else f"{invariant}: {detail}"
        super().__init__(msg)


class SchemaError(SqhtError, ValueError):
    pass


class NotHermitianError(ValidationError):
    def __init__(self, detail=""):
        super().__init__("hermitian", detail)


class NonFiniteError(ValidationError):
    def __init__(self, detail=""):
        super().__init__("finite", detail)


class NotFullSupportError(ValidationError):
    def __init__(self, detail=""):
        super().__init__("full support", detail)


class OutOfRangeError(ValidationError):
    def __init__(self, detail=""):
        super().__init__("range", detail)


class DimensionMismatchError(ValidationError):
    def __init__(self, detail=""):
        super().__init__("dimension", detail)


class WrongDimensionError(DimensionMismatchError):
    pass


class DimensionOverflowError(SqhtError, OverflowError):
    """A tensor product would exceed the configured dimension cap."""


class DomainError(SqhtError, ValueError):
    """A spectral function was evaluated outside its domain."""


class SupportViolationError(SqhtError, ValueError):
    """``q`` vanishes where ``p`` does not."""


class NotDistinguishableError(SqhtError, ValueError):
    """The two hypotheses coincide, so no test can separate them."""


class TauTooLargeError(SqhtError, ValueError):
    pass


class ZeroProbabilityOutcomeError(SqhtError, ValueError):
    pass


class EmptyInputError(SqhtError, ValueError):
    pass


class TruncatedPresentError(SqhtError, ValueError):
    """Truncated trials are not stopping times and break the change of measure."""


class NoTrajectoriesError(SqhtError, ValueError):
    pass


class DegenerateRegionError(SqhtError, ValueError):
    pass
