"""Exception types raised by the library."""


class FrolovError(Exception):
    """Base class for all errors raised by :mod:`frolov`."""


class ConstructionError(FrolovError, RuntimeError):
    """The generator polynomial did not yield ``d`` distinct real roots."""


class AdmissibilityError(FrolovError, ValueError):
    """A candidate generator violates the lattice product bound."""


class EnumerationLimitError(FrolovError, RuntimeError):
    """A lattice enumeration would visit more candidates than allowed."""


class TruncationError(FrolovError, RuntimeError):
    """An infinite Fourier sum or integral failed to converge."""
