"""Crosstalk characterisation toolkit for tunable-coupler qubit lattices.

Pulse-level two-level simulation, virtual xy / dc-flux / ac-flux crosstalk
measurements, gate-error budgets on large lattices, direct capacitive
crosstalk estimates, and the CSV/SVG plumbing around them.
"""
from .crosstalk import (
    FLUX_SIGNED,
    XY_DB,
    CrosstalkMatrix,
    LinearCrosstalkModel,
    amplitude_ratio_to_db,
    db_to_amplitude_ratio,
)
from .errors import (
    CalibrationError,
    ConfigurationError,
    ContractViolation,
    DatasetError,
    FitError,
    MeasurementError,
    NumericalError,
    XtalkError,
)
from .lattice import FrequencyPlan, LatticeDevice, build_lattice

__version__ = "0.1.0"

__all__ = [
    "CalibrationError",
    "ConfigurationError",
    "ContractViolation",
    "CrosstalkMatrix",
    "DatasetError",
    "FLUX_SIGNED",
    "FitError",
    "FrequencyPlan",
    "LatticeDevice",
    "LinearCrosstalkModel",
    "MeasurementError",
    "NumericalError",
    "XY_DB",
    "XtalkError",
    "__version__",
    "amplitude_ratio_to_db",
    "build_lattice",
    "db_to_amplitude_ratio",
]
