"""Exception hierarchy for superfield-kit.

Every error raised by the library derives from SuperfieldError, so callers
can catch one type at the CLI boundary.  The leaf classes mirror the failure
modes of the algebra: attempting to invert something with nilpotent body,
mixing incompatible charts, requesting an undefined derivation, and so on.
"""


class SuperfieldError(Exception):
    """Base class for all library errors."""


class NotInvertible(SuperfieldError):
    """Inversion requested for an element whose body is zero (or not a unit
    in the supported coefficient ring)."""


class ChartMismatch(SuperfieldError):
    """Two series/changes live on incompatible charts (different N, variant,
    or variable names)."""


class UnknownDerivation(SuperfieldError):
    """The requested derivation does not exist on this chart."""


class SingularOddBlock(SuperfieldError):
    """Superdeterminant needs the odd-odd block to be invertible."""


class NotSuperconformal(SuperfieldError):
    """A construction that requires the contact form to be preserved was
    handed a change that does not preserve it."""


class FamilyMismatch(SuperfieldError):
    """Module and coordinate change belong to different symmetry families."""


class MissingStructureConstant(SuperfieldError):
    """A bracket was requested for a generator pair the presentation does
    not list; the engine never guesses composites."""


class NonCanonical(SuperfieldError):
    """A Lambda-polynomial was not in canonical form where one is required."""


class OutOfRange(SuperfieldError):
    """Generator index outside the admissible range of its family."""


class UnknownModule(SuperfieldError):
    """Unknown name passed to the finite-module catalog."""


class NoWeightData(SuperfieldError):
    """Mode relabeling needs conformal weights the presentation lacks."""


class Overlap(SuperfieldError):
    """sign_sigma(I, J) requires disjoint index sets."""


class ParseError(SuperfieldError):
    """Syntax error in the expression language; carries line/column."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = "line %s, col %s: %s" % (line, column, message)
        super().__init__(message)


class ParityError(SuperfieldError):
    """An even slot received an odd expression or vice versa."""


class UnsupportedN(SuperfieldError):
    """The catalog entry is not defined for this number of odd variables."""


class SingularJet(SuperfieldError):
    """The 1-jet of a coordinate change is not invertible."""


class NonNilpotentAtOrder(SuperfieldError):
    """exp_action found terms that do not gain degree, so the exponential
    does not terminate at the requested order."""
