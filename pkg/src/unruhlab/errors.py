"""Exception types shared across the package."""


class UnruhlabError(Exception):
    """Base class for all package-specific errors."""


# --- Gaussian-state algebra ---

class NonPhysicalState(UnruhlabError):
    """Bosonic covariance matrix violates sigma + i*Omega >= 0."""


class DimensionMismatch(UnruhlabError):
    """Array shapes inconsistent with the declared number of modes."""


class EmptyPartition(UnruhlabError):
    """A mode partition or keep-set is empty or not a proper subset."""


class NotSymplectic(UnruhlabError):
    """Matrix fails S^T Omega S = Omega within tolerance."""


class NotSymmetric(UnruhlabError):
    """State lacks the block symmetry required by a localization routine."""


class LocalizationFailed(UnruhlabError):
    """Numeric unitary localization did not decouple a mode."""


class NegativeInput(UnruhlabError):
    """Negative value where a nonnegative one is required."""


# --- Special functions ---

class DomainError(UnruhlabError):
    """Argument outside the supported domain (e.g. x <= 0)."""


class OrderOutOfRange(UnruhlabError):
    """Bessel order magnitude beyond the documented supported range."""


class LossOfPrecisionWarning(UserWarning):
    """Result may carry reduced accuracy (distributional regime)."""


# --- Quadrature ---

class NonFiniteSample(UnruhlabError):
    """Integrand returned NaN or inf at a quadrature node."""


class IncompatibleGrids(UnruhlabError):
    """Two sampled modes do not share a usable common grid."""


class MeasureMismatch(UnruhlabError):
    """Scalar product requested between modes with incompatible charts
    or statistics."""


# --- Mode construction ---

class ZeroModeRequested(UnruhlabError):
    """Periodic cavity mode n = 0 does not exist (omitted zero mode)."""


class MasslessNonConformal1D(UnruhlabError):
    """Massless 1D Rindler modes exist only in the conformal chart."""


class FrequencyBelowMass(UnruhlabError):
    """Central frequency Omega0 <= m: wavepacket cannot propagate."""


class RootBracketingFailed(UnruhlabError):
    """Could not bracket the requested number of cavity eigenfrequencies."""


class ProjectionChangedProfile(UnruhlabError):
    """Positive-frequency projection altered the profile beyond the gate."""


# --- Channel ---

class QuadratureNotConverged(UnruhlabError):
    """Integral did not reach the requested tolerance; carries the best
    estimate in .best when available."""

    def __init__(self, message, best=None, error=None):
        super().__init__(message)
        self.best = best
        self.error = error


class MassRequired(UnruhlabError):
    """The 1D scalar channel needs m > 0 (infrared divergence at m = 0)."""


class UnsupportedGeometry(UnruhlabError):
    """Requested geometry not implemented for this field type."""


class ExpensivePathDisabled(UnruhlabError):
    """3+1D, D != 0 evaluation must be enabled explicitly."""


class NonPhysicalOutput(UnruhlabError):
    """Channel output state failed the physicality check; indicates
    quadrature error leakage."""


# --- Harvest ---

class ExpmNotConverged(UnruhlabError):
    """Matrix exponential produced non-finite entries."""


# --- CLI ---

class ConfigParseError(UnruhlabError):
    """Config file or flag could not be parsed; message names the key."""


class ValidationError(UnruhlabError):
    """Resolved configuration violates a module precondition."""
