"""Flux-tunable coupler physics and flux-crosstalk algebra.

Applied flux is linear in the line current, ``phi = I / mutual_current_per_phi0``.
The SQUID sees ``phi + flux_offset``; the offset is the flux threading the
loop at zero current.  Flux-crosstalk matrices act on applied fluxes:
``squid_flux = beta @ applied_flux + offsets``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .crosstalk import FLUX_SIGNED, CrosstalkMatrix
from .errors import ConfigurationError, ContractViolation, NumericalError
from .units import mhz_to_ghz

DEFAULT_MUTUAL_MA_PER_PHI0 = 3.0


@dataclass(frozen=True)
class CouplerModel:
    """Frequency-tunable coupler; ``omega_c0`` in GHz, ``g`` in MHz."""

    omega_c0: float = 7.9
    g: float = 50.0
    flux_offset: float = 0.0
    mutual_current_per_phi0: float = DEFAULT_MUTUAL_MA_PER_PHI0

    def __post_init__(self):
        if not self.omega_c0 > 0:
            raise ConfigurationError("omega_c0 must be positive")
        if self.g < 0:
            raise ConfigurationError("coupling g must be non-negative")
        if not self.mutual_current_per_phi0 > 0:
            raise ConfigurationError("mutual_current_per_phi0 must be positive")


def squid_frequency(omega_c0, squid_flux):
    """``omega_c0 * sqrt(|cos(pi * flux)|)`` with the flux already including offsets."""
    return omega_c0 * np.sqrt(np.abs(np.cos(np.pi * np.asarray(squid_flux, dtype=float))))[()]


def coupler_frequency(model: CouplerModel, phi):
    """Coupler frequency (GHz) at applied flux ``phi`` (flux quanta)."""
    return squid_frequency(model.omega_c0, np.asarray(phi, dtype=float) + model.flux_offset)


def hybridized_frequencies(omega_q, omega_c, g_mhz):
    """Dressed frequencies of a qubit-coupler pair in the single-excitation manifold.

    Eigenvalues of ``[[omega_q, g], [g, omega_c]]`` sorted ascending (GHz).
    Broadcasts over array inputs, returning ``(lower, upper)``.
    """
    wq = np.asarray(omega_q, dtype=float)
    wc = np.asarray(omega_c, dtype=float)
    g = mhz_to_ghz(np.asarray(g_mhz, dtype=float))
    mean = 0.5 * (wq + wc)
    half = np.sqrt((0.5 * (wq - wc)) ** 2 + g ** 2)
    return (mean - half)[()], (mean + half)[()]


def qubit_participation(omega_q, omega_c, g_mhz):
    """Qubit weight ``|<q|branch>|^2`` of the (lower, upper) dressed states."""
    wq = np.asarray(omega_q, dtype=float)
    wc = np.asarray(omega_c, dtype=float)
    g = mhz_to_ghz(np.asarray(g_mhz, dtype=float))
    # mixing angle of the 2x2 block
    theta = 0.5 * np.arctan2(2.0 * g, wq - wc)
    upper = np.cos(theta) ** 2
    return (1.0 - upper)[()], upper[()]


def current_to_flux(model: CouplerModel, current_ma):
    """Applied flux (flux quanta) produced by a line current in mA."""
    return (np.asarray(current_ma, dtype=float) / model.mutual_current_per_phi0)[()]


def flux_to_current(model: CouplerModel, phi):
    return (np.asarray(phi, dtype=float) * model.mutual_current_per_phi0)[()]


def compensation_currents(
    beta: CrosstalkMatrix,
    target_fluxes,
    mutual_current_per_phi0=DEFAULT_MUTUAL_MA_PER_PHI0,
    cond_warn: float = 1e8,
) -> np.ndarray:
    """Line currents (mA) that place exactly ``target_fluxes`` on every SQUID.

    Solves ``beta @ applied = target`` and converts the applied fluxes to
    currents with the per-line calibration ``mutual_current_per_phi0``
    (scalar or one value per line).
    """
    if beta.kind != FLUX_SIGNED:
        raise ContractViolation("compensation needs a signed flux crosstalk matrix")
    target = np.asarray(target_fluxes, dtype=float)
    if target.shape != (beta.size,):
        raise ContractViolation(f"target has shape {target.shape}, expected ({beta.size},)")
    B = beta.entries
    cond = np.linalg.cond(B)
    if not np.isfinite(cond):
        raise NumericalError("flux crosstalk matrix is singular")
    if cond > cond_warn:
        warnings.warn(f"flux crosstalk matrix is ill-conditioned (cond={cond:.3g})", RuntimeWarning)
    try:
        applied = np.linalg.solve(B, target)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"flux crosstalk matrix is singular: {exc}") from exc
    return applied * np.asarray(mutual_current_per_phi0, dtype=float)


def squid_fluxes(beta: CrosstalkMatrix, currents_ma, mutual_current_per_phi0=DEFAULT_MUTUAL_MA_PER_PHI0):
    """Flux on every SQUID (excluding offsets) for the given line currents."""
    applied = np.asarray(currents_ma, dtype=float) / np.asarray(mutual_current_per_phi0, dtype=float)
    return beta.entries @ applied


def random_flux_matrix(n: int, rng, scale: float = 5e-4, max_abs: float = 0.01, labels=None) -> CrosstalkMatrix:
    """Signed flux matrix with exponentially distributed off-diagonal magnitudes.

    ``scale`` is the mean magnitude; values are clipped to ``max_abs``.
    Useful as a stand-in for a measured matrix.
    """
    mag = np.minimum(rng.exponential(scale, size=(n, n)), max_abs)
    sign = rng.choice([-1.0, 1.0], size=(n, n))
    e = mag * sign
    np.fill_diagonal(e, 1.0)
    return CrosstalkMatrix(FLUX_SIGNED, e, labels=labels)
