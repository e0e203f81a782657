"""Exception hierarchy shared by every module."""


class RHSError(Exception):
    """Base class for all library errors."""


class DomainError(RHSError, ValueError):
    """An argument lies outside the domain of the operation (e.g. r < 0)."""


class DegenerateEnergy(RHSError, ValueError):
    """Energy within ``eps_energy`` of a threshold (0 or v0)."""

    def __init__(self, energy, threshold, eps):
        self.energy = energy
        self.threshold = threshold
        self.eps = eps
        super().__init__(
            f"energy {energy!r} lies within {eps:g} of the threshold {threshold!r}"
        )


class IncompatibleRegion(RHSError, ValueError):
    """Eigenfunction family requested outside its energy region."""


class OnSpectrum(RHSError, ValueError):
    """Resolvent requested at an energy in the spectrum [0, inf)."""


class QuadratureFailure(RHSError, RuntimeError):
    def __init__(self, message, estimate=None):
        self.estimate = estimate
        if estimate is not None:
            message = f"{message} (achieved error estimate {estimate:.3e})"
        super().__init__(message)


class ExtrapolationFailure(QuadratureFailure):
    pass


class CutoffTooSmall(QuadratureFailure):
    pass


class NonRealEigenfunction(RHSError, ArithmeticError):
    pass


class NormalizationError(RHSError, ValueError):
    pass


class SupportError(RHSError, ValueError):
    pass


class CapabilityError(RHSError, TypeError):
    """Operation needs a capability (e.g. analytic h-application) the input lacks."""


class ConfigError(RHSError, ValueError):
    pass
