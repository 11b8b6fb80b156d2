"""Exception hierarchy shared across the package."""


class WindowBandsError(Exception):
    """Base class for all package-specific errors."""


class DegenerateL(WindowBandsError):
    """The value-functional vector L(theta) is numerically zero.

    The leading-order method breaks down at this quasi-momentum; under the
    non-degeneracy condition on the first eigenfunction this cannot happen.
    """


class DegenerateFirstFunctional(WindowBandsError):
    """l_theta of the first eigenfunction vanished (corrupted input)."""


class NondegeneracyViolated(WindowBandsError):
    """The first eigenfunction has equal moduli at the two junction points.

    The leading-order band analysis requires |psi_1(M+)| != |psi_1(M-)|;
    symmetric cells violate this for every eigenfunction.
    """


class NotPositiveDefinite(WindowBandsError):
    """Gram matrix lost its guaranteed lower spectral bound (numerical corruption)."""


class ConstraintResidual(WindowBandsError):
    """Rotated basis failed its defining constraints beyond tolerance."""


class NotApplicable(WindowBandsError):
    """Requested a quantity that does not exist for this multiplicity."""


class DomainError(WindowBandsError):
    """Point outside the closed upper half-plane (or at a branch point)."""


class GridError(WindowBandsError):
    """Malformed discretization specification."""


class ResolutionError(GridError):
    """Grid does not resolve the coupling window."""


class BandsOverlap(UserWarning):
    """Leading-order band intervals intersect at the requested epsilon.

    Warning, not an error: the data is still returned, flagged.
    """


class NoConvergence(WindowBandsError):
    """Iterative eigensolver failed to converge."""


class ClusterAmbiguity(WindowBandsError):
    """Eigenvalue cluster boundary too close to the clustering tolerance."""


class NoCrossing(WindowBandsError):
    """Degeneracy bracket does not contain a parity-branch crossing."""


class TrendViolation(WindowBandsError):
    """Convergence-rate sweep failed its monotone-trend or ratio assertions."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
