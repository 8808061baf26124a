"""Exception types raised by esdkit."""


class EsdkitError(Exception):
    """Base class for all esdkit errors."""


class InvalidState(EsdkitError, ValueError):
    """An amplitude vector or wavefunction is not normalized."""


class TruncationInsufficient(EsdkitError):
    """The Fock-space cutoff cannot hold the requested state to tolerance."""


class DegenerateRoots(EsdkitError, ArithmeticError):
    """Two characteristic exponents of a photon block (nearly) coincide."""

    def __init__(self, message, n=None, separation=None):
        super().__init__(message)
        self.n = n
        self.separation = separation


class ToleranceNotMet(EsdkitError):
    """Adaptive step control ran out of its step budget."""


class NonPhysicalDensity(EsdkitError, ValueError):
    """A density matrix has a clearly negative eigenvalue."""
