"""Exception types raised across the package.

Every error derives from :class:`SchurLabError`, so callers (and the CLI)
can catch one base class. Subclasses also derive from the closest builtin
(``ValueError`` / ``ArithmeticError``) so generic handlers keep working.
"""


class SchurLabError(Exception):
    """Base class for all package errors."""


class ShapeMismatch(SchurLabError, ValueError):
    pass


# kept as an alias: several operations document the condition under this name
SizeMismatch = ShapeMismatch
DimensionMismatch = ShapeMismatch


class NotHermitian(SchurLabError, ValueError):
    pass


class NotPSD(SchurLabError, ValueError):
    pass


class Degenerate(SchurLabError, ArithmeticError):
    """Interpolation data lies on the boundary of solvability."""


class DegenerateAtLevel(Degenerate):
    def __init__(self, level, margin=None):
        self.level = level
        self.margin = margin
        msg = f"data becomes degenerate at level n={level}"
        if margin is not None:
            msg += f" (margin {margin:.3e})"
        super().__init__(msg)


class Infeasible(SchurLabError, ArithmeticError):
    """No Schur function has the given initial coefficients."""


class NonContractiveParameter(SchurLabError, ValueError):
    pass


class NotAContraction(SchurLabError, ValueError):
    pass


class SeriesNotInvertible(SchurLabError, ArithmeticError):
    pass


class CoincidentPoints(SchurLabError, ValueError):
    pass


class OnCircle(SchurLabError, ValueError):
    pass


class PoleEvaluation(SchurLabError, ZeroDivisionError):
    pass


class OutOfDomain(SchurLabError, ValueError):
    pass


class SingularDenominator(SchurLabError, ArithmeticError):
    pass


class NotASolution(SchurLabError, ArithmeticError):
    pass


class SingularResolvent(SchurLabError, ArithmeticError):
    pass


class NotInvariant(SchurLabError, ValueError):
    pass


class NotSquare(SchurLabError, ValueError):
    pass


class NotSimple(SchurLabError, ValueError):
    pass


class NotContractiveOnCircle(SchurLabError, ValueError):
    pass


class RankUnstable(SchurLabError, ArithmeticError):
    pass


class FactorizationDiverged(SchurLabError, ArithmeticError):
    pass


class RangeInclusionViolated(SchurLabError, ArithmeticError):
    pass


class NotInner(SchurLabError, ValueError):
    pass


class AnalyticityViolated(SchurLabError, ArithmeticError):
    pass


class DeterminantVanishesIdentically(SchurLabError, ArithmeticError):
    pass


class DenominatorVanishes(SchurLabError, ArithmeticError):
    pass


class MalformedInput(SchurLabError, ValueError):
    """Input file or flag does not follow the documented schema."""
