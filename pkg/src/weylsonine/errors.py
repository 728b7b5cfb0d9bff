"""Exception and warning types raised across the package."""


class WeylSonineError(Exception):
    """Base class for all package errors."""


class OutOfRangeError(WeylSonineError, ValueError):
    """A requested point lies outside the sampled or admissible range."""


class UnsupportedFormError(WeylSonineError):
    """A kernel has no closed time-domain form; use the spectral route."""


class NoLevyRepresentationError(WeylSonineError):
    """The kernel class has no Lévy density available."""


class IllPosedError(WeylSonineError):
    """A spectral multiplier is unbounded or the ellipticity condition fails.

    Attributes
    ----------
    xi : float or None
        Frequency at which the problem was detected, when known.
    infimum : float or None
        Measured ellipticity infimum, when applicable.
    """

    def __init__(self, message, xi=None, infimum=None):
        super().__init__(message)
        self.xi = xi
        self.infimum = infimum


class ConvergenceError(WeylSonineError):
    """A quadrature failed to reach the requested tolerance."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class EdgeDecayWarning(UserWarning):
    """A signal does not decay to the quiescent level at its grid edges."""
