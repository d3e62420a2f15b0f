"""Exception hierarchy shared by every module of the toolkit."""


class XtalkError(Exception):
    """Base class for all toolkit errors."""


class ConfigurationError(XtalkError, ValueError):
    """Invalid device, plan or run configuration."""


class NumericalError(XtalkError, ArithmeticError):
    """Integration or linear algebra broke down.

    ``time`` carries the simulation time (ns) of the failure when known.
    """

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class ContractViolation(XtalkError, ValueError):
    """An operation was called with inputs that break its contract."""


class FitError(XtalkError, RuntimeError):
    """A curve fit did not converge or the data cannot identify the model.

    ``best`` holds the best-so-far parameter dict and ``residual_rms`` the
    residual of that solution, so callers can still inspect it.
    """

    def __init__(self, message, best=None, residual_rms=None):
        super().__init__(message)
        self.best = best
        self.residual_rms = residual_rms


class MeasurementError(XtalkError, RuntimeError):
    """A virtual measurement protocol could not produce a value."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class CalibrationError(MeasurementError):
    """A calibration step (period, offset, voltage scale) failed."""


class DatasetError(XtalkError, ValueError):
    """A crosstalk or capacitance file is malformed."""
