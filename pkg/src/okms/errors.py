"""Exception types shared across the package."""


class OkmsError(Exception):
    """Base class for all package-specific errors."""


class GridMismatchError(OkmsError):
    """Field values do not match the node layout of their grid."""


class UnsupportedDomainError(OkmsError):
    """An operation received a grid kind it does not support."""


class NonZeroMeanError(OkmsError):
    """A mean-zero precondition failed; carries the measured mean."""

    def __init__(self, mean, tol):
        self.mean = float(mean)
        self.tol = float(tol)
        super().__init__(
            f"field mean {self.mean:.3e} exceeds mean-zero tolerance {self.tol:.1e}"
        )


class DivergenceError(OkmsError):
    """A time step produced NaN/Inf values."""


class ConfigError(OkmsError):
    """Configuration file is missing, malformed, or violates an invariant."""

    def __init__(self, key, reason):
        self.key = key
        self.reason = reason
        super().__init__(f"{key}: {reason}")


class UndefinedMultiplicityError(OkmsError):
    """Multiplicity requested for a field with no interface."""


class IncompatibleVelocityError(OkmsError):
    """Surface velocities do not satisfy the zero-total-flux condition."""

    def __init__(self, total_flux, tol):
        self.total_flux = float(total_flux)
        super().__init__(
            f"total surface flux {self.total_flux:.3e} exceeds tolerance {tol:.1e}"
        )


class InadmissibleBumpError(OkmsError):
    """The correction bump pairs to nearly zero with the current field."""
