"""
Exception hierarchy shared by every module of the toolkit.

All errors derive from ValueError so callers that only care about bad input
can keep catching ValueError.
"""


class BosonSimError(ValueError):
    """Base class for toolkit errors"""


class DimensionError(BosonSimError):
    """Matrix or state shapes do not fit the operation"""


class SizeLimitError(BosonSimError):
    """Input exceeds the size an exact routine accepts"""


class PatternError(BosonSimError):
    """Malformed or mismatched occupation pattern"""


class ConservationError(PatternError):
    """Input and output photon totals differ"""


class ClosedFormInapplicableError(BosonSimError):
    """A closed-form path was requested outside its assumptions"""


class ConditioningError(BosonSimError):
    """Conditioning on an event of zero probability"""


class TailMassError(BosonSimError):
    """Fock truncation discards more probability than allowed"""


class AccuracyError(BosonSimError):
    """A numerical procedure failed its convergence gate"""


class FeasibilityError(BosonSimError):
    """The requested size is beyond desk scale"""


class DegenerateNormError(BosonSimError):
    """A norm that must be positive is zero"""


class UnnormalizedTableError(BosonSimError):
    """A distribution table does not sum to one"""


class SupportMismatchError(BosonSimError):
    """Two distribution tables are defined on different supports"""


class DegenerateTableError(BosonSimError):
    """A table has too few cells for a goodness-of-fit test"""


class ParameterError(BosonSimError):
    """A physical parameter lies outside its allowed range"""


class NotUnitaryError(BosonSimError):
    """A matrix required to be unitary is not"""
