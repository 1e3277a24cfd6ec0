"""Exception hierarchy shared by the solvers and the command line."""


class SadsError(Exception):
    """Base class for all library errors."""

    code = "error"


class InvalidParameterError(SadsError, ValueError):
    """A physical or numerical parameter is outside its admissible range."""

    code = "invalid_parameter"


class DomainError(SadsError, ValueError):
    """A coordinate lies outside the exterior region."""

    code = "domain"


class OutOfStripError(SadsError, ValueError):
    """The spectral parameter lies below the admissible strip."""

    code = "out_of_strip"


class ScaledRepresentationError(SadsError, OverflowError):
    """An unscaled exponential would overflow double precision."""

    code = "scaled_representation"


class ConvergenceError(SadsError, RuntimeError):
    """An integrator or iterative solver failed to converge."""

    code = "convergence"


class InconclusiveError(SadsError, RuntimeError):
    """The argument principle could not resolve the phase along a contour."""

    code = "inconclusive"


class AtResonanceError(SadsError, ArithmeticError):
    """The matching matrix is numerically singular at this spectral point."""

    code = "at_resonance"


class SeedMismatchError(SadsError, ValueError):
    """A boundary seed was used with a mode of the other mass regime."""

    code = "seed_mismatch"
