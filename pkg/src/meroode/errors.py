"""Exception types raised by the library."""


class MeroodeError(Exception):
    """Base class for all library errors."""


class UnsupportedDegree(MeroodeError):
    pass


class RootsNotCentered(MeroodeError):
    pass


class DegenerateLattice(MeroodeError):
    pass


class AtPole(MeroodeError):
    """Evaluation point too close to a pole.

    ``location`` is the nearest pole (a lattice point for Weierstrass
    functions) when known.
    """

    def __init__(self, message: str, location: complex | None = None):
        super().__init__(message)
        self.location = location


class NoMeromorphicSolutions(MeroodeError):
    pass


class NoFactorization(MeroodeError):
    pass


class ParticularOnly(MeroodeError):
    """Only the beta = 0 (Riccati) family exists; carries those families."""

    def __init__(self, message: str, families=()):
        super().__init__(message)
        self.families = tuple(families)


class ConstantDerivationFailed(MeroodeError):
    pass


class UnboundParam(MeroodeError):
    pass


class UnsupportedShape(MeroodeError):
    pass


class SamplingExhausted(MeroodeError):
    pass


class InputError(MeroodeError):
    """Malformed job input (CLI exit code 2)."""


class PoleCountingFailed(MeroodeError):
    """Adaptive contour subdivision did not resolve the poles."""


class CrossCheckFailed(MeroodeError):
    """The two pole-counting methods disagree."""
