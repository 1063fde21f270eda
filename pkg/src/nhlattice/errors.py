"""Exception and warning types raised across the package."""


class NHLatticeError(Exception):
    """Base class for all errors raised by :mod:`nhlattice`."""

    code = "error"


class DimensionError(NHLatticeError, ValueError):
    code = "dimension"


class InvalidParameter(NHLatticeError, ValueError):
    code = "invalid_parameter"


class NonDiagonalizable(NHLatticeError, ArithmeticError):
    """Eigenvector matrix is numerically singular (close to an exceptional point)."""

    code = "non_diagonalizable"


class SpectrumOverlap(NHLatticeError, ArithmeticError):
    """The two coefficient matrices of a Sylvester equation share an eigenvalue."""

    code = "spectrum_overlap"


class NotPSD(NHLatticeError, ValueError):
    code = "not_psd"


class EpsilonRange(NHLatticeError, ValueError):
    code = "epsilon_range"


class Unstable(NHLatticeError, ArithmeticError):
    """Some eigenvalue of the effective Hamiltonian has a non-negative imaginary part."""

    code = "unstable"


class UnstableBoson(Unstable):
    code = "unstable_boson"


class QuadratureUnderResolved(NHLatticeError, ArithmeticError):
    code = "quadrature_under_resolved"


class BranchAmbiguity(NHLatticeError, ArithmeticError):
    code = "branch_ambiguity"


class ResonancePole(NHLatticeError, ArithmeticError):
    code = "resonance_pole"


class BoundaryOccupation(NHLatticeError, ValueError):
    """Occupation sits on the edge of the allowed interval; log-weight is infinite."""

    code = "boundary_occupation"


class DegenerateOccupations(NHLatticeError, ArithmeticError):
    code = "degenerate_occupations"


class ZeroDenominator(NHLatticeError, ZeroDivisionError):
    code = "zero_denominator"


class RegimeWarning(UserWarning):
    """An asymptotic formula was evaluated outside its regime of validity."""
