"""ac-flux calibration and crosstalk with a modified Ramsey sequence.

The qubit gets two detuned pi/2 pulses.  Between them the coupler flux is
modulated, ``phi(t) = phi_dc + A cos(w_ac t + theta)``, which on average pulls
the coupler towards the qubit and lowers the Ramsey fringe frequency.  The
qubit-coupler pair is simulated in a frame rotating at the drive frequency
(qubit) and at the idle coupler frequency (coupler)::

    H = -(w_q - w_d)/2 Z(x)I - (w_c(phi(t)) - w_c,dc)/2 I(x)Z
        + g (e^{i nu t} s+(x)s- + h.c.) + Omega(t) X(x)I

with ``nu = w_d - w_c,dc``.  A source line at the same ac frequency adds
``beta A_j cos(w_ac t + theta_j)``; the two tones combine into one complex
amplitude, so every run is described by an effective amplitude and phase.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import least_squares

from ..engine import (
    IDENTITY,
    SIGMA_MINUS,
    SIGMA_PLUS,
    SIGMA_X,
    SIGMA_Z,
    TimeDependentHamiltonian,
    evolve,
    expectation,
    ground,
    tensor,
)
from ..errors import CalibrationError, ConfigurationError, ContractViolation, FitError, MeasurementError
from ..fitting import SinusoidFit, fit_decaying_sinusoid, zero_intercept_slope
from ..flux import CouplerModel, coupler_frequency, hybridized_frequencies
from ..units import MHZ_PER_GHZ, TWO_PI, mhz_to_ghz

ZI = tensor(SIGMA_Z, IDENTITY)
IZ = tensor(IDENTITY, SIGMA_Z)
XI = tensor(SIGMA_X, IDENTITY)
SPSM = tensor(SIGMA_PLUS, SIGMA_MINUS)

# With the default device a sideband resonance between the modulated coupler
# and the qubit sits near 0.064 flux quanta of ac amplitude; the default
# calibration window and bias stay below it.
DEFAULT_FLUX_GRID = tuple(np.linspace(0.0, 0.06, 25))


@dataclass(frozen=True)
class RamseyConfig:
    """Modified-Ramsey settings.

    Frequencies in GHz unless suffixed, times in ns, fluxes in flux quanta.
    The idle grid should sample whole ac periods so the fringe is read
    stroboscopically.
    """

    qubit_frequency: float = 4.2
    coupler: CouplerModel = field(default_factory=CouplerModel)
    dc_bias: float = 0.3
    ac_frequency: float = 0.2
    drive_detuning_mhz: float = 10.0
    pulse_ns: float = 10.0
    idle_times: tuple = tuple(np.arange(0.0, 1000.0 + 1e-9, 5.0))
    step: float = 0.05
    phase_offsets: tuple = tuple(np.linspace(0.0, 3.0 * np.pi, 13))

    def validate(self):
        idle = np.asarray(self.idle_times, dtype=float)
        if idle.ndim != 1 or idle.size < 8 or np.any(np.diff(idle) <= 0) or idle[0] < 0:
            raise ConfigurationError("idle grid must be increasing, non-negative, with at least 8 points")
        if self.ac_frequency < 0:
            raise ConfigurationError("ac frequency must be non-negative")
        if self.pulse_ns <= 0 or self.step <= 0:
            raise ConfigurationError("pulse length and step must be positive")
        if self.drive_detuning_mhz == 0:
            raise ConfigurationError("Ramsey needs a non-zero drive detuning")

    @property
    def coupler_dc_frequency(self) -> float:
        return float(coupler_frequency(self.coupler, self.dc_bias))

    @property
    def drive_frequency(self) -> float:
        """Dressed qubit frequency at the dc bias minus the programmed detuning."""
        lo, hi = hybridized_frequencies(self.qubit_frequency, self.coupler_dc_frequency, self.coupler.g)
        dressed = lo if self.coupler_dc_frequency > self.qubit_frequency else hi
        return float(dressed - mhz_to_ghz(self.drive_detuning_mhz))


def ramsey_fringes(config: RamseyConfig, amplitudes, phases=0.0):
    """Excited-state population vs idle time for a batch of ac tones.

    ``amplitudes`` and ``phases`` broadcast to one batch.  Returns
    ``(idle_times, populations)`` with populations of shape ``(B, T)``.
    """
    config.validate()
    amp, ph = np.broadcast_arrays(np.atleast_1d(np.asarray(amplitudes, dtype=float)),
                                  np.atleast_1d(np.asarray(phases, dtype=float)))
    amp, ph = amp.ravel(), ph.ravel()
    B = amp.size
    idle = np.asarray(config.idle_times, dtype=float)
    fd = config.drive_frequency
    wc_dc = config.coupler_dc_frequency
    g = TWO_PI * mhz_to_ghz(config.coupler.g)
    nu = TWO_PI * (fd - wc_dc)
    dq = -0.5 * TWO_PI * (config.qubit_frequency - fd)
    om = (np.pi / 4.0) / config.pulse_ns
    T = config.pulse_ns
    w_ac = TWO_PI * config.ac_frequency

    def exchange(t):
        return g * np.exp(1j * nu * t)

    # first pi/2 pulse, shared by the whole batch
    H1 = TimeDependentHamiltonian(4).add(ZI, dq).add(XI, om).add_hc(SPSM, exchange)
    psi = evolve(H1, ground(4), [0.0, T], config.step).final_state

    t0 = T

    def coupler_shift(t):
        phi = config.dc_bias + amp * np.cos(w_ac * (t - t0) + ph)
        return -0.5 * TWO_PI * (coupler_frequency(config.coupler, phi) - wc_dc)

    H2 = TimeDependentHamiltonian(4).add(ZI, dq).add(IZ, coupler_shift).add_hc(SPSM, exchange)
    grid = t0 + idle
    if idle[0] > 0:
        grid = np.concatenate([[t0], grid])
    res = evolve(H2, np.tile(psi, (B, 1)), grid, config.step, store_states=True)
    states = res.states[1:] if idle[0] > 0 else res.states  # (T, B, 4)

    # second pulse: each idle time starts at its own absolute time
    start = np.repeat(grid[-idle.size:], B)
    H3 = TimeDependentHamiltonian(4).add(ZI, dq).add(XI, om).add_hc(
        SPSM, lambda tau: g * np.exp(1j * nu * (start + tau))
    )
    final = evolve(H3, states.reshape(-1, 4), [0.0, T], config.step).final_state
    pe = 0.5 * (1.0 - expectation(final, ZI))
    return idle, pe.reshape(idle.size, B).T


def fringe_fit(idle, population) -> SinusoidFit:
    """Fringe frequency by periodogram peak and sinusoid refinement."""
    return fit_decaying_sinusoid(idle, population)


def fringe_frequencies_mhz(config: RamseyConfig, amplitudes, phases=0.0, noise_sigma: float = 0.0, seed: int = 0):
    """Fitted fringe frequency (MHz) and its standard error for each tone in a batch."""
    idle, pops = ramsey_fringes(config, amplitudes, phases)
    if noise_sigma > 0:
        rng = np.random.default_rng(seed)
        pops = np.clip(pops + rng.normal(0.0, noise_sigma, size=pops.shape), 0.0, 1.0)
    freqs, errs = [], []
    for p in pops:
        try:
            fit = fringe_fit(idle, p)
        except FitError as exc:
            raise MeasurementError("Ramsey fringe fit failed", diagnostics={"error": str(exc)}) from exc
        freqs.append(fit.frequency * MHZ_PER_GHZ)
        errs.append(fit.frequency_err * MHZ_PER_GHZ)
    return np.array(freqs), np.array(errs)


@dataclass
class AcCalibration:
    k: float
    k_err: float
    voltages: np.ndarray
    measured_mhz: np.ndarray
    flux_grid: np.ndarray
    simulated_mhz: np.ndarray
    mapped_flux: np.ndarray

    def frequency_at(self, flux):
        """Interpolated simulated fringe frequency (MHz) at an ac amplitude."""
        return PchipInterpolator(self.flux_grid, self.simulated_mhz)(flux)


def ac_flux_calibration(
    config: RamseyConfig,
    voltage_grid: Sequence[float] = tuple(np.linspace(0.0, 0.4, 9)),
    k_true: float = 8.0,
    flux_grid: Optional[Sequence[float]] = None,
    noise_sigma: float = 0.0,
    seed: int = 0,
) -> AcCalibration:
    """Find the ac line scale ``k`` in ``V = k phi`` (volts per flux quantum).

    The measured fringes are generated with the hidden ``k_true``.  The same
    sequence is simulated on ``flux_grid``; each measured frequency is mapped
    back to a flux through the simulated curve, which must be strictly
    monotone.  A first estimate of ``k`` is the zero-intercept slope of
    voltage vs mapped flux; it is refined by least squares on the frequency
    residuals ``measured(V) - simulated(V / k)``, which weights every point
    by its actual sensitivity.
    """
    V = np.asarray(voltage_grid, dtype=float)
    if V.ndim != 1 or np.count_nonzero(V) < 2 or np.any(V < 0):
        raise ContractViolation("voltage grid needs at least two positive amplitudes")
    if not k_true > 0:
        raise ContractViolation("k must be positive")
    if flux_grid is None:
        flux_grid = DEFAULT_FLUX_GRID
    phi = np.asarray(flux_grid, dtype=float)

    measured, _ = fringe_frequencies_mhz(config, V / k_true, noise_sigma=noise_sigma, seed=seed)
    simulated, _ = fringe_frequencies_mhz(config, phi)
    d = np.diff(simulated)
    if not (np.all(d < 0) or np.all(d > 0)):
        raise CalibrationError(
            "simulated fringe frequency is not monotonic in the calibration window",
            diagnostics={"flux_grid": phi.tolist(), "simulated_mhz": simulated.tolist()},
        )
    order = np.argsort(simulated)
    inverse = PchipInterpolator(simulated[order], phi[order])
    lo, hi = simulated.min(), simulated.max()
    tol = 1e-6 * max(1.0, abs(hi))
    if np.any(measured < lo - tol) or np.any(measured > hi + tol):
        raise CalibrationError(
            "measured fringe shift lies outside the simulated window",
            diagnostics={"measured_mhz": measured.tolist(), "range_mhz": (lo, hi)},
        )
    mapped = inverse(np.clip(measured, lo, hi))
    k0, _ = zero_intercept_slope(mapped, V)

    forward = PchipInterpolator(phi, simulated)
    k_min = V.max() / phi.max()

    def resid(p):
        return forward(V / p[0]) - measured

    sol = least_squares(resid, x0=[max(k0, k_min * 1.0001)], bounds=([k_min], [np.inf]), x_scale=[k0 or 1.0])
    k = float(sol.x[0])
    J = sol.jac
    dof = max(1, V.size - 1)
    s2 = float(np.sum(sol.fun**2)) / dof
    JtJ = float(np.sum(J**2))
    k_err = float(np.sqrt(s2 / JtJ)) if JtJ > 0 else float("inf")
    return AcCalibration(k, k_err, V, measured, phi, simulated, V / k)


@dataclass
class AcCrosstalkResult:
    beta: float
    upper_bound: bool
    swing_mhz: float
    resolution_mhz: float
    gamma_phi0_per_mhz: float
    phase_offsets: np.ndarray
    fringe_mhz: np.ndarray
    bias_amplitude: float
    source_amplitude: float


def linearization_slope(calibration: AcCalibration, flux: float) -> float:
    """``|d phi / d(fringe)|`` from the two calibration points adjacent to ``flux``."""
    phi = calibration.flux_grid
    f = calibration.simulated_mhz
    k = int(np.searchsorted(phi, flux))
    if k < phi.size and np.isclose(phi[k], flux, rtol=0, atol=1e-12):
        a, b = k - 1, k + 1
    else:
        a, b = k - 1, k
    if a < 0 or b >= phi.size:
        raise CalibrationError("bias amplitude is not inside the calibration grid")
    return float(abs((phi[b] - phi[a]) / (f[b] - f[a])))


def measure_ac_crosstalk(
    config: RamseyConfig,
    calibration: AcCalibration,
    beta: float,
    bias_amplitude: float = 0.05,
    source_amplitude: float = 0.5,
    noise_sigma: float = 0.0,
    seed: int = 0,
    resolution_floor_mhz: float = 1e-6,
) -> AcCrosstalkResult:
    """ac crosstalk from the swing of the fringe frequency vs relative phase.

    The victim carries ``bias_amplitude`` at phase 0 and the source
    ``source_amplitude`` at the victim's ac frequency and phase ``dtheta``.
    The fringe frequency follows ``c + s cos(dtheta - theta0)``; the
    peak-to-peak swing ``2 s`` maps to a flux swing ``2 beta A_j`` through
    the calibration slope, ``beta = gamma * swing / (2 A_j)``.  A swing not
    exceeding the fit resolution is reported as an upper bound.
    """
    dtheta = np.asarray(config.phase_offsets, dtype=float)
    if dtheta.size < 3:
        raise ContractViolation("need at least three phase offsets")
    if source_amplitude <= 0 or bias_amplitude <= 0:
        raise ContractViolation("ac amplitudes must be positive")
    z = bias_amplitude + beta * source_amplitude * np.exp(1j * dtheta)
    freqs, errs = fringe_frequencies_mhz(config, np.abs(z), np.angle(z), noise_sigma=noise_sigma, seed=seed)

    A = np.column_stack([np.cos(dtheta), np.sin(dtheta), np.ones_like(dtheta)])
    coef = np.linalg.lstsq(A, freqs, rcond=None)[0]
    swing = 2.0 * float(np.hypot(coef[0], coef[1]))
    resid = freqs - A @ coef
    resolution = max(resolution_floor_mhz, 2.0 * float(np.max(np.nan_to_num(errs))), 2.0 * float(np.std(resid)))
    gamma = linearization_slope(calibration, bias_amplitude)
    upper = swing <= resolution
    beta_est = gamma * max(swing, resolution if upper else 0.0) / (2.0 * source_amplitude)
    return AcCrosstalkResult(
        beta=float(beta_est),
        upper_bound=bool(upper),
        swing_mhz=swing,
        resolution_mhz=resolution,
        gamma_phi0_per_mhz=gamma,
        phase_offsets=dtheta,
        fringe_mhz=freqs,
        bias_amplitude=bias_amplitude,
        source_amplitude=source_amplitude,
    )
