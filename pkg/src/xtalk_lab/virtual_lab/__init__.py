"""Closed-loop virtual versions of the xy, dc-flux and ac-flux measurements."""
from .ac_flux import (
    AcCalibration,
    AcCrosstalkResult,
    RamseyConfig,
    ac_flux_calibration,
    fringe_frequencies_mhz,
    measure_ac_crosstalk,
    ramsey_fringes,
)
from .dc_flux import (
    DcCrosstalkResult,
    SpectroscopyResult,
    dc_flux_spectroscopy,
    measure_dc_crosstalk,
    restoring_slope,
)
from .xy import (
    RabiTrace,
    TransferFunction,
    XYCrosstalkResult,
    measure_xy_crosstalk,
    rabi_slope,
    synth_rabi_trace,
)

__all__ = [
    "AcCalibration",
    "AcCrosstalkResult",
    "DcCrosstalkResult",
    "RabiTrace",
    "RamseyConfig",
    "SpectroscopyResult",
    "TransferFunction",
    "XYCrosstalkResult",
    "ac_flux_calibration",
    "dc_flux_spectroscopy",
    "fringe_frequencies_mhz",
    "measure_ac_crosstalk",
    "measure_dc_crosstalk",
    "measure_xy_crosstalk",
    "rabi_slope",
    "ramsey_fringes",
    "restoring_slope",
    "synth_rabi_trace",
]
