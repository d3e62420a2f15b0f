"""Single-qubit gate error caused by xy crosstalk from every other drive line.

A victim qubit at the centre of an odd ``n x n`` lattice performs an X gate
while every other qubit is driven with an identical X pulse at its own
frequency.  In the frame rotating with the victim's drive the Hamiltonian is

    H(t) = Omega(t) sigma_x
         + sum_j r_j Omega(t) [sigma_x cos(phi_j(t)) + sigma_y sin(phi_j(t))]

with ``r_j = 10**(Lambda_j / 20)`` from the linear distance model,
``phi_j(t) = delta_j t + phi_j`` and ``delta_j`` the source-victim detuning.
The error is the ground-state population left after the gate, averaged over
the eight frequencies the victim can take.

Rabi convention: a Hamiltonian coefficient ``Omega`` on ``sigma_x`` produces
population oscillations at angular frequency ``2 Omega``, so an X gate has
``integral(Omega) = pi/2``.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .crosstalk import LinearCrosstalkModel, db_to_amplitude_ratio
from .engine import (
    IDENTITY,
    SIGMA_MINUS,
    SIGMA_X,
    TimeDependentHamiltonian,
    evolve,
    ground,
)
from .errors import ConfigurationError, ContractViolation, MeasurementError
from .lattice import SUBGROUPS, FrequencyPlan, build_lattice, offset_for_center
from .units import SPEED_OF_LIGHT_MM_PER_NS, TWO_PI

ZERO_PHASE = "zero_phase"
PROPAGATION_PHASE = "propagation_phase"
RANDOM_PHASE = "random_phase"
PHASE_MODES = (ZERO_PHASE, PROPAGATION_PHASE, RANDOM_PHASE)

SQUARE = "square"
SINE = "sine"
PULSE_SHAPES = (SQUARE, SINE)


def pulse_envelope(shape: str, duration: float, area: float = np.pi / 2) -> Callable:
    """Envelope on ``[0, duration]`` whose time integral equals ``area``."""
    if duration <= 0:
        raise ConfigurationError("pulse duration must be positive")
    if shape == SQUARE:
        amp = area / duration
        return lambda t: np.where((t >= 0) & (t <= duration), amp, 0.0)[()]
    if shape == SINE:
        amp = area * np.pi / (2.0 * duration)
        return lambda t: np.where(
            (t >= 0) & (t <= duration), amp * np.sin(np.pi * t / duration), 0.0
        )[()]
    raise ConfigurationError(f"unknown pulse shape {shape!r}")


def average_gate_fidelity(U: np.ndarray, V: np.ndarray) -> float:
    """``(|Tr(V^dag U)|^2 + d) / (d (d + 1))`` for unitaries of dimension d."""
    d = U.shape[0]
    return float((abs(np.trace(V.conj().T @ U)) ** 2 + d) / (d * (d + 1)))


@dataclass(frozen=True)
class ErrorScalingConfig:
    n: int = 5
    model: LinearCrosstalkModel = field(default_factory=LinearCrosstalkModel)
    phase_mode: str = ZERO_PHASE
    gate_time: float = 20.0
    pulse_shape: str = SINE
    step: float = 0.125
    frequencies: FrequencyPlan = field(default_factory=FrequencyPlan)
    pitch: float = 2.0
    #: drop sources whose frequency equals the victim's
    exclude_resonant: bool = False
    #: seed for ``random_phase`` mode
    seed: int = 0

    def validate(self):
        if int(self.n) != self.n or self.n < 1 or self.n % 2 == 0:
            raise ConfigurationError(f"lattice side must be a positive odd integer, got {self.n!r}")
        if self.phase_mode not in PHASE_MODES:
            raise ConfigurationError(f"unknown phase mode {self.phase_mode!r}")
        if self.pulse_shape not in PULSE_SHAPES:
            raise ConfigurationError(f"unknown pulse shape {self.pulse_shape!r}")
        if self.step <= 0 or self.gate_time <= 0:
            raise ConfigurationError("gate time and step must be positive")
        ratio = self.gate_time / self.step
        if abs(ratio - round(ratio)) > 1e-9:
            raise ConfigurationError("step must divide the gate time")


@dataclass
class ErrorScalingResult:
    errors: np.ndarray
    mean_error: float
    config: ErrorScalingConfig
    subgroups: Tuple[str, ...] = SUBGROUPS

    @property
    def fidelity(self) -> float:
        return 1.0 - self.mean_error

    @property
    def n_qubits(self) -> int:
        return self.config.n ** 2


def _source_groups(config: ErrorScalingConfig, label: str, rng) -> Tuple[np.ndarray, np.ndarray]:
    """Collapse all sources into one complex weight per distinct detuning.

    Returns ``(deltas, weights)`` with ``deltas`` in rad/ns and
    ``weights = sum_j r_j exp(-i phi_j)`` over the sources sharing a detuning.
    """
    dev = build_lattice(
        config.n,
        config.pitch,
        config.frequencies,
        xy_model=config.model,
        offset=offset_for_center(config.n, label),
    )
    v = dev.center_index()
    pos = dev.positions()
    freqs = dev.frequencies()
    d = np.hypot(*(pos - pos[v]).T)
    src = np.arange(dev.num_qubits) != v
    if config.exclude_resonant:
        src &= ~np.isclose(freqs, freqs[v], rtol=0, atol=1e-12)
    d, f = d[src], freqs[src]
    r = db_to_amplitude_ratio(config.model(d))
    if config.phase_mode == ZERO_PHASE:
        phi = np.zeros_like(d)
    elif config.phase_mode == PROPAGATION_PHASE:
        phi = TWO_PI * f * d / SPEED_OF_LIGHT_MM_PER_NS
    else:
        phi = rng.uniform(0.0, TWO_PI, size=d.shape)
    delta = np.round(TWO_PI * (f - freqs[v]), 12)
    deltas = np.unique(delta)
    weights = np.array([np.sum(r[delta == k] * np.exp(-1j * phi[delta == k])) for k in deltas])
    return deltas, weights


def _victim_error(config: ErrorScalingConfig, label: str, rng) -> float:
    deltas, weights = _source_groups(config, label, rng)
    omega = pulse_envelope(config.pulse_shape, config.gate_time)

    def coupling(t):
        # <0|H|1>; sigma_x cos(phi) + sigma_y sin(phi) has exp(-i phi) there
        return omega(t) * (1.0 + np.sum(weights * np.exp(-1j * deltas * t)))

    H = TimeDependentHamiltonian(2).add_hc(SIGMA_MINUS, coupling)
    res = evolve(H, ground(), [0.0, config.gate_time], config.step)
    p_ground = abs(res.final_state[0]) ** 2
    return float(p_ground)


def simulate_gate_error(config: ErrorScalingConfig) -> ErrorScalingResult:
    """Mean X-gate error of the centre qubit over the eight frequency classes."""
    config.validate()
    rng = np.random.default_rng(config.seed)
    errors = np.array([_victim_error(config, label, rng) for label in SUBGROUPS])
    return ErrorScalingResult(errors=errors, mean_error=float(errors.mean()), config=config)


def error_scaling_curve(config: ErrorScalingConfig, n_list: Sequence[int]) -> List[ErrorScalingResult]:
    """One :func:`simulate_gate_error` per lattice size, ordered by ``n``."""
    n_list = sorted(int(n) for n in n_list)
    for n in n_list:
        if n % 2 == 0 or n < 1:
            raise ConfigurationError(f"lattice sizes must be odd, got {n}")
    return [simulate_gate_error(replace(config, n=n)) for n in n_list]


def parasitic_gate_fidelity(
    lambda_db: float,
    detuning_mhz: float,
    gate_time: float = 20.0,
    pulse_shape: str = SQUARE,
    step: float = 0.125,
    victim_driven: bool = False,
) -> float:
    """Average gate fidelity of the victim under one detuned parasitic X pulse.

    By default the victim idles, so the target is the identity and the only
    error is the off-resonant excitation by the source pulse of relative
    amplitude ``10**(lambda_db/20)``.  With ``victim_driven`` the victim runs
    its own X gate at the same time and the target is X.
    """
    r = 0.0 if np.isneginf(lambda_db) else float(db_to_amplitude_ratio(lambda_db))
    omega = pulse_envelope(pulse_shape, gate_time)
    delta = TWO_PI * detuning_mhz * 1e-3
    own = 1.0 if victim_driven else 0.0

    def coupling(t):
        return omega(t) * (own + r * np.exp(-1j * delta * t))

    H = TimeDependentHamiltonian(2).add_hc(SIGMA_MINUS, coupling)
    # both basis states at once; columns of U are the evolved basis vectors
    res = evolve(H, np.eye(2, dtype=complex), [0.0, gate_time], step)
    U = res.final_state.T
    return average_gate_fidelity(U, SIGMA_X if victim_driven else IDENTITY)


def detuning_threshold(
    lambda_db: float,
    gate_time: float = 20.0,
    target_fidelity: float = 0.999,
    pulse_shape: str = SQUARE,
    step: float = 0.125,
    victim_driven: bool = False,
    max_detuning_mhz: float = 1000.0,
    scan_mhz: float = 0.5,
    tol_mhz: float = 1e-3,
) -> float:
    """Smallest detuning (MHz) at which the parasitic-pulse fidelity reaches the target.

    The fidelity is not monotone in detuning (square pulses have spectral
    zeros), so a coarse scan first locates the first grid point meeting the
    target and bisection then refines the crossing inside that bracket.
    """
    if not 0.5 < target_fidelity < 1:
        raise ContractViolation("target fidelity must lie in (0.5, 1)")
    if not lambda_db < 0:
        raise ContractViolation("crosstalk must be negative in dB")
    if np.isneginf(lambda_db):
        return 0.0

    def fid(x):
        return parasitic_gate_fidelity(lambda_db, x, gate_time, pulse_shape, step, victim_driven)

    if fid(0.0) >= target_fidelity:
        return 0.0
    lo = 0.0
    x = scan_mhz
    while x <= max_detuning_mhz:
        if fid(x) >= target_fidelity:
            hi = x
            break
        lo = x
        x += scan_mhz
    else:
        raise MeasurementError(
            f"target fidelity {target_fidelity} not reached below {max_detuning_mhz} MHz",
            diagnostics={"lambda_db": lambda_db, "gate_time": gate_time},
        )
    while hi - lo > tol_mhz:
        mid = 0.5 * (lo + hi)
        if fid(mid) >= target_fidelity:
            hi = mid
        else:
            lo = mid
    return hi


def offresonant_excitation(parasitic_rabi, detuning):
    """Maximum excitation ``Omega^2 / (Omega^2 + Delta^2)`` of a detuned drive.

    Both arguments share one unit (e.g. cyclic MHz).
    """
    om2 = np.square(np.asarray(parasitic_rabi, dtype=float))
    den = om2 + np.square(np.asarray(detuning, dtype=float))
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(den > 0, om2 / np.where(den > 0, den, 1.0), 0.0)
    return out[()]


def config_summary(config: ErrorScalingConfig) -> dict:
    d = asdict(config)
    d["frequencies"] = list(config.frequencies.frequencies())
    return d
