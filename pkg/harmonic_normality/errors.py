"""
Exception hierarchy for the harmonic normality toolkit.

Input errors (bad files, bad specifiers, violated preconditions) map to CLI exit
code 2, analysis errors (singularities, overflow, non-convergence) to exit code 1.
"""

from typing import Optional


class HarmonicNormalityError(Exception):
    """Base class for every error raised by the toolkit."""

    exit_code = 1


class InputError(HarmonicNormalityError):
    """Invalid user input: expression text, map files, specifiers, preconditions."""

    exit_code = 2


class AnalysisError(HarmonicNormalityError):
    """A numerical analysis could not be completed."""

    exit_code = 1


class ExpressionSyntaxError(InputError):
    """Expression text does not follow the grammar."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnknownIdentifierError(ExpressionSyntaxError):
    """An identifier other than z, i, exp, sin or cos was used."""


class MalformedNumberError(ExpressionSyntaxError):
    """A numeric literal could not be read."""


class MapFileError(InputError):
    """Map file is missing a required key or has an unreadable line."""

    def __init__(self, message: str, key: Optional[str] = None):
        super().__init__(message)
        self.key = key


class WeightSpecError(InputError):
    """Weight specifier or weight parameters are not admissible."""


class PhiDomainError(InputError):
    """Weight evaluated outside [0, 1)."""


class NormalizationError(InputError):
    """Co-analytic part does not vanish at the base point."""


class CriterionPreconditionError(InputError):
    """Target set has the wrong cardinality or repeated values."""


class SingularityError(AnalysisError):
    """Evaluation requested too close to a declared singularity."""

    def __init__(self, point: complex, singularity: complex):
        super().__init__(
            f"point {point!r} lies within tolerance of singularity {singularity!r}")
        self.point = point
        self.singularity = singularity


class OverflowGuardError(AnalysisError):
    """Evaluation produced a non-finite value or one above the overflow guard."""

    def __init__(self, point: complex, message: str = "value exceeds overflow guard"):
        super().__init__(f"{message} at {point!r}")
        self.point = point


class DegenerateDenominatorError(AnalysisError):
    """|h'(z)| is below tolerance, so the dilatation is undefined."""


class DegenerateSequenceError(AnalysisError):
    """Sup of f#/phi vanished numerically; the map behaves like a constant."""


class OutOfRangeError(AnalysisError):
    """Rescaled variable outside the admissible disc |zeta| < R_n."""


class HypothesisViolationError(AnalysisError):
    """A hypothesis of the analysis failed its numerical check."""


class BoundaryZeroError(AnalysisError):
    """f - a comes within clearance of zero on a cell boundary."""

    def __init__(self, point: complex, clearance: float):
        super().__init__(
            f"|f - a| below clearance {clearance:g} on boundary near {point!r}")
        self.point = point


class NonConvergenceError(AnalysisError):
    """An iterative procedure did not stabilise."""


class SensePreservingError(AnalysisError):
    """The map reverses orientation somewhere in the probed region."""

    def __init__(self, witness: complex, jacobian: float):
        super().__init__(
            f"Jacobian {jacobian:.3e} <= 0 at {witness!r}; map is not sense-preserving")
        self.witness = witness
        self.jacobian = jacobian
