"""Exception types shared across the package."""


class KingcodeError(ValueError):
    """Base class for invalid input or a failed structural check."""


class DimensionError(KingcodeError):
    """Operands have incompatible shapes or subsystem dimensions."""


class DecompositionError(KingcodeError):
    """A measurement family cannot be written over disjoint error supports.

    Attributes
    ----------
    offending : list of (J, i)
        Measurement labels whose decomposition failed.
    residuals : dict
        Frobenius residual per ``(J, i)``.
    """

    def __init__(self, message, offending=(), residuals=None):
        super().__init__(message)
        self.offending = list(offending)
        self.residuals = dict(residuals or {})
