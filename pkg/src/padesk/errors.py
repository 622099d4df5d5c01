"""Exception hierarchy shared by all padesk modules.

Every failure mode that a verification can hit has its own class so callers
(and the CLI exit-code contract) can tell configuration mistakes apart from
genuine verification failures.
"""


class PadeskError(Exception):
    """Base class for all padesk errors."""


class ConfigError(PadeskError):
    """Malformed ring/scenario/CLI configuration."""


class NotEisenstein(ConfigError):
    """Polynomial fails the Eisenstein invariant."""


class NotIrreducible(ConfigError):
    """Residue-field modulus is reducible."""


class PrecisionExhausted(PadeskError):
    """A result would need more p-adic digits than the operands carry."""


class ZeroInput(PadeskError):
    """Operation undefined on (residually) zero input."""


class NotAUnit(PadeskError):
    """Inversion requested for a non-unit."""


class IndeterminateAtPrecision(PadeskError):
    """Requested predicate cannot be decided at the declared caps."""


class NoConvergence(PadeskError):
    """Newton iteration precondition failed or the residual stalled."""


class KrasnerFail(PadeskError):
    """Congruence depth below the root-tracking threshold.

    Carries ``threshold``: the least depth at which tracking is certified.
    """

    def __init__(self, message, threshold=None):
        super().__init__(message)
        self.threshold = threshold


class RepeatedRoots(PadeskError):
    """Polynomial has (or may have, at precision) a repeated root."""


class NotSquarefree(RepeatedRoots):
    """Squarefreeness precondition failed."""


class NotClose(NoConvergence):
    """Perturbed polynomial is not close enough to the reference one."""


class DegreeMismatch(PadeskError):
    """Polynomials that must share a degree do not."""


class CapExceeded(PadeskError):
    """A closure/search hit its element cap.

    ``partial_count`` records how many elements were found before bailing.
    """

    def __init__(self, message, partial_count=None):
        super().__init__(message)
        self.partial_count = partial_count


class SearchExhausted(CapExceeded):
    """Generator-lift search hit its cap without a definite verdict."""


class RuleMismatch(PadeskError):
    """Nice-prime event flags do not match exactly one update rule."""


class NegativeDimension(PadeskError):
    """A dimension update would go below zero."""


class VerificationFailed(PadeskError):
    """A check that is supposed to certify a true statement failed."""
