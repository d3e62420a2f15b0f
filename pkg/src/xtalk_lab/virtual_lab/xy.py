"""Rabi-slope measurement of on-resonant xy crosstalk.

The victim qubit ``i`` is driven on resonance through line ``j``.  Its Rabi
frequency grows linearly with the line amplitude, ``f_R = k_ij V``, and the
crosstalk is the dB ratio of that slope to the slope of qubit ``j`` driven
through its own line.  Traces come from the two-level engine; decay toward
0.5 and readout noise are added afterwards.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..crosstalk import CrosstalkMatrix, XY_DB, db_to_amplitude_ratio
from ..engine import SIGMA_X, SIGMA_Z, TimeDependentHamiltonian, evolve, ground
from ..errors import ContractViolation, FitError, MeasurementError
from ..fitting import SinusoidFit, fit_decaying_sinusoid, zero_intercept_slope
from ..lattice import LatticeDevice
from ..units import MHZ_PER_GHZ

#: measured Rabi frequency per volt on a qubit's own line, MHz/V
DEFAULT_DRIVE_GAIN_MHZ_PER_V = 25.0
DEFAULT_DECAY_NS = 1e4


@dataclass(frozen=True)
class TransferFunction:
    """Per-frequency amplitude gain of a drive chain, linearly interpolated.

    The default is flat (unit gain everywhere).
    """

    frequencies_ghz: tuple = (0.0,)
    gains: tuple = (1.0,)

    def __post_init__(self):
        f = np.asarray(self.frequencies_ghz, dtype=float)
        g = np.asarray(self.gains, dtype=float)
        if f.shape != g.shape or f.ndim != 1 or f.size == 0:
            raise ContractViolation("transfer table needs matching 1-d frequency and gain arrays")
        if np.any(np.diff(f) <= 0):
            raise ContractViolation("transfer table frequencies must increase")
        if np.any(g <= 0):
            raise ContractViolation("transfer gains must be positive")

    def __call__(self, f_ghz) -> float:
        return float(np.interp(f_ghz, self.frequencies_ghz, self.gains))


@dataclass
class RabiTrace:
    times: np.ndarray
    excited_population: np.ndarray
    drive_amplitude: float
    victim: int = 0
    source: int = 0


def _injected_db(device: LatticeDevice, victim: int, source: int, xy_matrix: Optional[CrosstalkMatrix]) -> float:
    if victim == source:
        return 0.0
    if xy_matrix is not None:
        if xy_matrix.kind != XY_DB:
            raise ContractViolation("xy truth must be an xy_db matrix")
        return float(xy_matrix.entries[victim, source])
    return device.xy_crosstalk_db(victim, source)


def rabi_frequency_mhz(
    device: LatticeDevice,
    victim: int,
    source: int,
    amplitude,
    xy_matrix: Optional[CrosstalkMatrix] = None,
    drive_gain: float = DEFAULT_DRIVE_GAIN_MHZ_PER_V,
    transfer: Optional[TransferFunction] = None,
):
    """True Rabi frequency (MHz) the simulator uses for a given line amplitude."""
    ratio = db_to_amplitude_ratio(_injected_db(device, victim, source, xy_matrix))
    gain = 1.0 if transfer is None else transfer(device.sites[victim].frequency)
    return drive_gain * gain * ratio * np.asarray(amplitude, dtype=float)


def _simulate_populations(f_rabi_mhz: np.ndarray, times: np.ndarray, step: Optional[float]) -> np.ndarray:
    """Excited population of resonantly driven qubits, one row per Rabi frequency."""
    f = np.atleast_1d(np.asarray(f_rabi_mhz, dtype=float)) / MHZ_PER_GHZ
    # coefficient on sigma_x is half the population-oscillation angular frequency
    omega = np.pi * f
    dt = times[1] - times[0] if times.size > 1 else 1.0
    fmax = f.max()
    h = dt if fmax == 0 else min(dt, 1.0 / (50.0 * fmax))
    if step is not None:
        h = min(h, step)
    H = TimeDependentHamiltonian(2).add(SIGMA_X, omega)
    psi0 = np.tile(ground(), (f.size, 1))
    res = evolve(H, psi0, times, h, e_ops={"z": SIGMA_Z})
    return (0.5 * (1.0 - res["z"])).T


def _dress(p: np.ndarray, times: np.ndarray, decay_time: float, noise_sigma: float, rng) -> np.ndarray:
    if decay_time is not None and np.isfinite(decay_time):
        p = 0.5 + (p - 0.5) * np.exp(-times / decay_time)
    if noise_sigma > 0:
        p = np.clip(p + rng.normal(0.0, noise_sigma, size=p.shape), 0.0, 1.0)
    return p


def synth_rabi_trace(
    device: LatticeDevice,
    victim: int,
    source: int,
    amplitude: float,
    duration: float = 100.0,
    n_points: int = 401,
    noise_sigma: float = 0.0,
    seed: int = 0,
    decay_time: Optional[float] = DEFAULT_DECAY_NS,
    xy_matrix: Optional[CrosstalkMatrix] = None,
    drive_gain: float = DEFAULT_DRIVE_GAIN_MHZ_PER_V,
    transfer: Optional[TransferFunction] = None,
    step: Optional[float] = None,
) -> RabiTrace:
    """Rabi oscillation of ``victim`` driven through line ``source`` at its own frequency."""
    if amplitude < 0:
        raise ContractViolation("drive amplitude must be non-negative")
    times = np.linspace(0.0, duration, n_points)
    f = rabi_frequency_mhz(device, victim, source, amplitude, xy_matrix, drive_gain, transfer)
    p = _simulate_populations(np.array([f]), times, step)[0]
    p = _dress(p, times, decay_time, noise_sigma, np.random.default_rng(seed))
    return RabiTrace(times, p, float(amplitude), victim, source)


@dataclass
class RabiSlope:
    slope_mhz_per_v: float
    slope_err: float
    amplitudes: np.ndarray
    rabi_mhz: np.ndarray
    fits: List[Optional[SinusoidFit]] = field(default_factory=list)


def rabi_slope(
    device: LatticeDevice,
    victim: int,
    source: int,
    amplitudes: Sequence[float],
    noise_sigma: float = 0.0,
    seed: int = 0,
    n_points: int = 401,
    min_cycles: float = 3.0,
    min_snr: float = 3.0,
    start_window: float = 100.0,
    max_window: float = 4e5,
    decay_time: Optional[float] = DEFAULT_DECAY_NS,
    xy_matrix: Optional[CrosstalkMatrix] = None,
    drive_gain: float = DEFAULT_DRIVE_GAIN_MHZ_PER_V,
    transfer: Optional[TransferFunction] = None,
) -> RabiSlope:
    """Fit Rabi frequency vs amplitude with a line through the origin.

    Each trace starts with a ``start_window`` ns record.  Traces showing fewer
    than ``min_cycles`` oscillations are re-taken with a longer window sized
    from the frequency estimate (at most four times longer).  Zero
    amplitudes are recorded as zero Rabi frequency.
    """
    amps = np.asarray(amplitudes, dtype=float)
    if amps.ndim != 1 or amps.size < 1 or np.any(amps < 0):
        raise ContractViolation("amplitudes must be a non-empty sequence of non-negative values")
    seeds = np.random.SeedSequence(seed).spawn(amps.size)
    rngs = [np.random.default_rng(s) for s in seeds]
    f_true = rabi_frequency_mhz(device, victim, source, amps, xy_matrix, drive_gain, transfer)

    rabi = np.zeros(amps.size)
    fits: List[Optional[SinusoidFit]] = [None] * amps.size
    todo = [k for k in range(amps.size) if amps[k] > 0]
    window = np.full(amps.size, float(start_window))
    while todo:
        # traces sharing a window are simulated as one batch
        retry = []
        for w in np.unique(window[todo]):
            group = [k for k in todo if window[k] == w]
            times = np.linspace(0.0, w, n_points)
            pops = _simulate_populations(f_true[group], times, None)
            for row, k in enumerate(group):
                p = _dress(pops[row], times, decay_time, noise_sigma, rngs[k])
                try:
                    fit = fit_decaying_sinusoid(times, p)
                except FitError:
                    fit = None
                # a fit whose amplitude does not stand out of the residual is noise
                ok = fit is not None and fit.amplitude > min_snr * fit.residual_rms
                if ok and min_cycles <= fit.cycles <= n_points / 8:
                    fits[k] = fit
                    rabi[k] = fit.frequency * MHZ_PER_GHZ
                    continue
                grow = 4.0
                if ok and 0 < fit.cycles < min_cycles:
                    grow = min(4.0, max(1.5, (min_cycles + 1.0) / fit.cycles))
                window[k] = w * grow
                retry.append(k)
        todo = retry
        if todo and np.any(window[todo] > max_window):
            raise MeasurementError(
                "Rabi oscillation not resolved within the longest window",
                diagnostics={"victim": victim, "source": source, "amplitudes": amps[todo].tolist()},
            )
    k, err = zero_intercept_slope(amps, rabi)
    return RabiSlope(k, err, amps, rabi, fits)


@dataclass
class XYCrosstalkResult:
    victim: int
    source: int
    lambda_db: float
    cross: RabiSlope
    self_: RabiSlope

    @property
    def lambda_err_db(self) -> float:
        """First-order dB uncertainty from the two slope errors."""
        rel = np.hypot(self.cross.slope_err / self.cross.slope_mhz_per_v, self.self_.slope_err / self.self_.slope_mhz_per_v)
        return float(20.0 / np.log(10.0) * rel)


def measure_xy_crosstalk(
    device: LatticeDevice,
    victim: int,
    source: int,
    amplitude_grid: Sequence[float] = (5.0, 10.0, 15.0, 20.0),
    self_amplitude_grid: Sequence[float] = (0.25, 0.5, 0.75, 1.0),
    noise_sigma: float = 0.0,
    seed: int = 0,
    **kw,
) -> XYCrosstalkResult:
    """Crosstalk ``20 log10(k_ij / k_jj)`` of line ``source`` onto qubit ``victim``.

    The cross-drive uses ``amplitude_grid`` and the reference self-drive of
    qubit ``source`` uses ``self_amplitude_grid``; both need at least three
    points.  Extra keywords go to :func:`rabi_slope`.
    """
    for i in (victim, source):
        if not 0 <= i < device.num_qubits:
            raise ContractViolation(f"qubit index {i} out of range")
    if len(self_amplitude_grid) < 3 or len(amplitude_grid) < 3:
        raise ContractViolation("need at least three amplitudes per slope")
    ss_self, ss_cross = np.random.SeedSequence(seed).spawn(2)
    ref = rabi_slope(device, source, source, self_amplitude_grid, noise_sigma,
                     int(ss_self.generate_state(1)[0]), **kw)
    if victim == source:
        cross = ref
    else:
        cross = rabi_slope(device, victim, source, amplitude_grid, noise_sigma,
                           int(ss_cross.generate_state(1)[0]), **kw)
    if not (cross.slope_mhz_per_v > 0 and ref.slope_mhz_per_v > 0):
        raise MeasurementError(
            "Rabi slope is not positive",
            diagnostics={"cross": cross.slope_mhz_per_v, "self": ref.slope_mhz_per_v},
        )
    lam = 20.0 * np.log10(cross.slope_mhz_per_v / ref.slope_mhz_per_v)
    return XYCrosstalkResult(victim, source, float(lam), cross, ref)


def measure_xy_matrix(device: LatticeDevice, pairs, **kw) -> Dict[tuple, XYCrosstalkResult]:
    """Run :func:`measure_xy_crosstalk` over ``(victim, source)`` pairs in input order."""
    return {(i, j): measure_xy_crosstalk(device, i, j, **kw) for i, j in pairs}
