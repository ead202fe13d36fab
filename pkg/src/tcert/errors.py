"""Exception types shared across the toolkit."""


class TcertError(Exception):
    """Base class for all toolkit errors."""


class PresentationSyntaxError(TcertError):
    """Presentation source text does not follow the grammar."""


class UndeclaredGenerator(TcertError):
    """A word uses a letter that is not a declared generator."""


class UnreducedRelator(TcertError):
    """A relator contains an adjacent x x^-1 pair; auto-reduction is refused."""


class BackendRelatorViolation(TcertError):
    """The concrete generator images do not satisfy a declared relator."""


class BallBudgetExceeded(TcertError):
    """Ball enumeration passed the configured element cap."""


class RadiusTooSmall(TcertError):
    """A product or support does not fit in the supplied ball.

    ``minimal`` carries the smallest sufficient radius when it is known.
    """

    def __init__(self, message, minimal=None):
        super().__init__(message)
        self.minimal = minimal


class BallMismatch(TcertError):
    """Operands live on different ambient balls."""


class ShapeMismatch(TcertError):
    """Matrix shapes are not compatible for the requested operation."""


class NotAComplex(TcertError):
    """A differential pair fails d.d = 0; the witness entry is reported."""


class TruncatedDegree(TcertError):
    """Certification was requested at a degree the complex does not honestly cover."""


class EncodingIncomplete(TcertError):
    """A target support element admits no Gram factorization over the basis."""


class DimensionMismatch(TcertError):
    """Imported solution dimensions do not match the problem."""


class SolutionParseError(TcertError):
    """A solution or problem file is malformed."""


class RepairSingular(TcertError):
    """The exact repair system is rank deficient."""


class PSDFailedAfterRetries(TcertError):
    """No retreated epsilon produced an exactly positive semidefinite Gram matrix."""


class FingerprintMismatch(TcertError):
    """Certificate was issued for a different complex (or convention)."""


class NotUnitary(TcertError):
    """Operation requires a unitary module action."""


class CapExceeded(TcertError):
    """Brute-force computation exceeds the configured size cap."""


class DegenerateProblem(TcertError):
    """The encoded target vanishes identically; every epsilon is feasible."""
