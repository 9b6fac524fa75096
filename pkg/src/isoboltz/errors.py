"""Exception types shared across the package."""


class IsoboltzError(Exception):
    """Base class for all library errors."""


class DomainError(IsoboltzError):
    """An argument lies outside the mathematical domain of the operation."""


class PoleError(DomainError):
    """A Gamma-function argument is too close to a non-positive integer.

    The message names the offending argument so constant formulas can be
    debugged without re-deriving which factor blew up.
    """


class NoRootError(IsoboltzError):
    """A bracketing scan found no sign change."""


class FileFormatError(IsoboltzError):
    """A snapshot or config file does not match the documented layout."""


class CostError(IsoboltzError):
    """A brute-force oracle would exceed its cost guard."""


class ConfigError(IsoboltzError):
    """An invalid runtime configuration (sample counts, policies, ...)."""


class ConvergenceError(IsoboltzError):
    """Adaptive quadrature failed to meet its internal tolerance."""


class DegenerateError(IsoboltzError):
    """An operation received input it cannot produce a finite answer for."""


class BlowupError(IsoboltzError):
    """Time integration produced non-finite or absurdly large values."""

    def __init__(self, message, last_good=None, t=None):
        super().__init__(message)
        self.last_good = last_good
        self.t = t
