"""Exception hierarchy shared by all qfi_lab modules."""


class QfiLabError(Exception):
    """Base class for every error raised by the package."""


class ValidationError(QfiLabError, ValueError):
    """An argument violates a documented precondition."""


class BranchDiscontinuityError(QfiLabError):
    """A parameterized state jumps between neighbouring parameter values."""

    def __init__(self, message, beta=None, overlap=None):
        super().__init__(message)
        self.beta = beta
        self.overlap = overlap


class DegeneratePointError(QfiLabError):
    """The ground state is degenerate, so its derivative is undefined."""

    def __init__(self, message, beta=None, gap=None):
        super().__init__(message)
        self.beta = beta
        self.gap = gap


class DivergentSensitivityError(QfiLabError):
    """The signal slope vanishes and the phase sensitivity diverges."""


class ZeroSlopeError(QfiLabError):
    """The measured slope is too small to invert into a phase uncertainty."""


class FitError(QfiLabError):
    """A least-squares fit failed to converge."""

    def __init__(self, message, initial_guess=None, rms_residual=None):
        super().__init__(message)
        self.initial_guess = initial_guess
        self.rms_residual = rms_residual


class AddressabilityError(QfiLabError):
    """Two transitions are too close in frequency to be driven separately."""

    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class TransitionDarkError(QfiLabError):
    """The modulation has no matrix element for the requested transition."""

    def __init__(self, message, level=None):
        super().__init__(message)
        self.level = level


class ConfigError(QfiLabError):
    """An experiment configuration is missing fields or has bad values."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field
