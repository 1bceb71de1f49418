"""Exception hierarchy.

Everything derives from :class:`QMError`, which is also a ``ValueError`` so
callers that only care about "bad input" can catch that.
"""

from __future__ import annotations


class QMError(ValueError):
    pass


class DimensionCapError(QMError):
    pass


class DimensionMismatchError(QMError):
    pass


class HermiticityError(QMError):
    def __init__(self, violation: float, message: str | None = None):
        self.violation = violation
        super().__init__(message or f"matrix is not Hermitian (max |M - M^dag| = {violation:.3e})")


class IsometryError(QMError):
    def __init__(self, deviation: float):
        self.deviation = deviation
        super().__init__(f"columns are not orthonormal (max inner-product deviation {deviation:.3e})")


class UnitarityError(QMError):
    def __init__(self, deviation: float):
        self.deviation = deviation
        super().__init__(f"operator is not unitary (max |U^dag U - I| = {deviation:.3e})")


class ValidationError(QMError):
    """Carries a :class:`~qmops.states.Diagnostic` listing every violated condition."""

    def __init__(self, diagnostic, what: str):
        self.diagnostic = diagnostic
        super().__init__(f"not a valid {what}: {diagnostic}")


class NormalizationError(QMError):
    pass


class NotAStateError(QMError):
    pass


class ZeroProbabilityOutcome(QMError):
    def __init__(self, probability: float):
        self.probability = probability
        super().__init__(f"outcome has probability {probability:.3e}; no conditional state")


class NotCompletelyPositiveError(QMError):
    def __init__(self, eigenvalue: float, witness):
        self.eigenvalue = eigenvalue
        self.witness = witness
        super().__init__(f"map is not completely positive (Choi eigenvalue {eigenvalue:.6g})")


class CutoffError(QMError):
    pass


class PreconditionError(QMError):
    pass
