"""Unit conventions and physical constants.

Frequencies are stored as cyclic GHz, times in ns, distances in mm, flux in
units of the flux quantum and crosstalk in amplitude dB (``20 log10``).
Angular frequencies in rad/ns are obtained with :func:`angular`.
"""
import numpy as np

TWO_PI = 2.0 * np.pi

#: speed of light in vacuum, mm/ns
SPEED_OF_LIGHT_MM_PER_NS = 299.792458

#: magnetic flux quantum, Wb
FLUX_QUANTUM_WB = 2.067833848e-15

MHZ_PER_GHZ = 1e3


def angular(f_ghz):
    """Cyclic frequency in GHz to angular frequency in rad/ns."""
    return (TWO_PI * np.asarray(f_ghz, dtype=float))[()]


def mhz_to_ghz(f_mhz):
    return f_mhz / MHZ_PER_GHZ


def ghz_to_mhz(f_ghz):
    return f_ghz * MHZ_PER_GHZ
