"""Exception hierarchy.

Validation problems derive from ``ValueError`` so callers that only care
about "bad input" can catch that. Numerical failures derive from
``NumericalError`` and map to CLI exit code 2.
"""

from __future__ import annotations


class GridsyncError(Exception):
    """Base class for every error raised by this package."""


# -- input / validation -------------------------------------------------------


class NetworkInvalid(GridsyncError, ValueError):
    """A CouplingNetwork invariant is violated."""


class InvalidDamping(NetworkInvalid):
    pass


class InvalidInertia(NetworkInvalid):
    pass


class InvalidPhaseShift(NetworkInvalid):
    pass


class NonzeroDiagonal(NetworkInvalid):
    pass


class NegativeCoupling(NetworkInvalid):
    pass


class ShapeMismatch(NetworkInvalid):
    pass


class MissingInertia(GridsyncError, ValueError):
    """A second-order model was requested on a network without M."""


class NotSymmetric(GridsyncError, ValueError):
    pass


# spectral.check_dotW_identity and spectral.laplacian use these names
Asymmetric = NotSymmetric
AsymmetricWeights = NotSymmetric


class NotComplete(GridsyncError, ValueError):
    pass


class Disconnected(GridsyncError, ValueError):
    pass


class LossyNetwork(GridsyncError, ValueError):
    pass


class NotPhaseCohesive(GridsyncError, ValueError):
    """Angles do not fit in the required open arc."""


class GammaOutOfRange(GridsyncError, ValueError):
    pass


class NTooSmall(GridsyncError, ValueError):
    pass


class RatioOutOfRange(GridsyncError, ValueError):
    """Certificate ratio >= 1: the certificate failed, gamma is undefined."""


class HypothesisViolated(GridsyncError, ValueError):
    pass


class TrajectoryTooShort(GridsyncError, ValueError):
    pass


class ConfigParse(GridsyncError, ValueError):
    """Malformed configuration file; message carries line/field context."""


# -- numerical ----------------------------------------------------------------


class NumericalError(GridsyncError, ArithmeticError):
    pass


class StepUnderflow(NumericalError):
    pass


class NonFiniteState(NumericalError):
    pass


class NoDecayWindow(NumericalError):
    pass


class RootNotBracketed(NumericalError):
    pass


class ReducedModelDiverged(NumericalError):
    pass
