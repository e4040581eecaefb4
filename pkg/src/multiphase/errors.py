"""Exception hierarchy shared by every module of the package."""


class MultiphaseError(Exception):
    """Base class for all errors raised by multiphase."""


class CutoffError(MultiphaseError, ValueError):
    """An occupation number exceeds the truncation cutoff of its state."""


class ResourceError(MultiphaseError):
    """A construction would exceed one of the hard size caps."""


class ModeMismatchError(MultiphaseError, ValueError):
    """Operands disagree on the number of modes."""


class NormalizationError(MultiphaseError, ValueError):
    """Amplitudes handed to a constructor are not normalized."""


class DegenerateSuperpositionError(MultiphaseError, ValueError):
    """A superposition collapsed to (numerically) the zero vector."""


class StepRangeError(MultiphaseError, ValueError):
    """Finite-difference step outside the supported range."""


class NonIdentifiableError(MultiphaseError, ValueError):
    """The Fisher information is singular or ill-conditioned."""


class NoInformationError(NonIdentifiableError):
    """The probe carries no phase information (zero denominator in a bound)."""


class AsymmetricStateError(MultiphaseError, ValueError):
    """The state violates the symmetry required by a closed-form route."""


class MandelQUndefinedError(MultiphaseError, ValueError):
    """Mandel Q requested for a mode with zero mean photon number."""


class SingularStructuredMatrixError(NonIdentifiableError):
    """The identity-plus-ones matrix is singular."""


class UnreachableTargetError(MultiphaseError, ValueError):
    """A mean-photon-number target cannot be reached by the family."""


class ConfigError(MultiphaseError, ValueError):
    """Invalid family or run configuration.

    ``field`` names the offending parameter when there is one.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field
