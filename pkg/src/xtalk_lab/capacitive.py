"""Direct capacitive xy crosstalk from capacitance data.

A qubit of capacitance ``C_q`` coupled through ``C_k`` to a line of
impedance ``Z`` loses photons into it at ``kappa = Z C_k^2 w_q^2 / C_q``.
A pulse of amplitude ``A0`` and shape factor ``b`` (mean of the normalised
envelope: 1 for square, 2/pi for a half sine) rotates the qubit by
``2 sqrt(kappa) b A0 T``.  The ratio of two such Rabi rates gives the
crosstalk of line ``j`` onto qubit ``i``::

    Lambda = 20 log10( (w_i C_ij) / (w_j C_jj) * sqrt(C_j / C_i) )

Capacitances are given in fF, frequencies as cyclic GHz, rates in 1/ns.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional

import numpy as np

from .errors import ContractViolation, DatasetError
from .units import TWO_PI

FEMTOFARAD = 1e-15
GIGAHERTZ = 1e9
PER_SECOND_TO_PER_NS = 1e-9

SQUARE_SHAPE = 1.0
SINE_SHAPE = 2.0 / np.pi


def photon_loss_rate(z_ohm, c_kappa_ff, omega_q_ghz, c_q_ff):
    """Energy decay rate (1/ns) of a qubit into a capacitively coupled line.

    ``omega_q_ghz`` is the cyclic qubit frequency; it is converted to rad/s.
    Evaluated in SI: Ohm * F^2 * (rad/s)^2 / F = 1/s, then scaled to 1/ns.
    """
    vals = [np.asarray(v, dtype=float) for v in (z_ohm, c_kappa_ff, omega_q_ghz, c_q_ff)]
    if any(np.any(v <= 0) for v in vals):
        raise ContractViolation("impedance, capacitances and frequency must be positive")
    z, ck, f, cq = vals
    w = TWO_PI * f * GIGAHERTZ
    kappa = z * (ck * FEMTOFARAD) ** 2 * w**2 / (cq * FEMTOFARAD)
    return (kappa * PER_SECOND_TO_PER_NS)[()]


def pi_pulse_amplitude(kappa_per_ns, shape_b, t_pi_ns):
    """Amplitude ``A0 = pi / (2 sqrt(kappa) b T_pi)`` for a pi rotation."""
    k, b, t = (np.asarray(v, dtype=float) for v in (kappa_per_ns, shape_b, t_pi_ns))
    if np.any(k <= 0) or np.any(b <= 0) or np.any(t <= 0):
        raise ContractViolation("kappa, shape factor and duration must be positive")
    return (np.pi / (2.0 * np.sqrt(k) * b * t))[()]


def rabi_rate(kappa_per_ns: float, amplitude: float, shape_b: float, t_pi_ns: float):
    """Rabi-rate envelope ``2 sqrt(kappa) A0 s(t)`` (rad/ns) on ``[0, t_pi]``.

    ``shape_b`` selects the envelope ``s``: 1 is square, 2/pi is a half sine.
    """
    peak = 2.0 * np.sqrt(kappa_per_ns) * amplitude
    if np.isclose(shape_b, SQUARE_SHAPE):
        return lambda t: np.where((t >= 0) & (t <= t_pi_ns), peak, 0.0)[()]
    if np.isclose(shape_b, SINE_SHAPE):
        return lambda t: np.where(
            (t >= 0) & (t <= t_pi_ns), peak * np.sin(np.pi * np.asarray(t) / t_pi_ns), 0.0
        )[()]
    raise ContractViolation("shape factor must be 1 (square) or 2/pi (sine)")


@dataclass(frozen=True)
class CapacitanceSet:
    """Qubit self capacitances, qubit-to-line couplings and qubit frequencies.

    ``coupling_ff[i, j]`` couples qubit ``i`` to the drive line of qubit ``j``.
    """

    self_ff: np.ndarray
    coupling_ff: np.ndarray
    frequencies_ghz: np.ndarray
    z_ohm: float = 50.0
    labels: Optional[tuple] = field(default=None)

    def __post_init__(self):
        c = np.array(self.self_ff, dtype=float)
        k = np.array(self.coupling_ff, dtype=float)
        f = np.array(self.frequencies_ghz, dtype=float)
        n = c.size
        if c.ndim != 1 or k.shape != (n, n) or f.shape != (n,):
            raise ContractViolation("capacitance arrays have inconsistent shapes")
        if np.any(c <= 0):
            raise ContractViolation("self capacitances must be positive")
        if np.any(k < 0):
            raise ContractViolation("coupling capacitances must be non-negative")
        if np.any(f <= 0) or not self.z_ohm > 0:
            raise ContractViolation("frequencies and impedance must be positive")
        for name, arr in (("self_ff", c), ("coupling_ff", k), ("frequencies_ghz", f)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def size(self) -> int:
        return self.self_ff.size

    def scaled(self, factor: float) -> "CapacitanceSet":
        """All capacitances multiplied by ``factor``."""
        return CapacitanceSet(self.self_ff * factor, self.coupling_ff * factor, self.frequencies_ghz, self.z_ohm, self.labels)

    def loss_rate(self, i: int, j: int):
        """Decay rate (1/ns) of qubit ``i`` into line ``j``."""
        return photon_loss_rate(self.z_ohm, self.coupling_ff[i, j], self.frequencies_ghz[i], self.self_ff[i])


def lambda_direct(caps: CapacitanceSet, victim: int, source: int) -> float:
    """Direct capacitive crosstalk (dB) of line ``source`` onto qubit ``victim``."""
    i, j = victim, source
    for q in (i, j):
        if not 0 <= q < caps.size:
            raise ContractViolation(f"qubit index {q} out of range")
    cjj = caps.coupling_ff[j, j]
    if cjj <= 0:
        raise ContractViolation("source qubit has no coupling to its own line")
    cij = caps.coupling_ff[i, j]
    if cij == 0:
        return float("-inf")
    w = caps.frequencies_ghz
    c = caps.self_ff
    ratio = (w[i] * cij) / (w[j] * cjj) * np.sqrt(c[j] / c[i])
    return float(20.0 * np.log10(ratio))


def lambda_direct_matrix(caps: CapacitanceSet) -> np.ndarray:
    """``[victim, source]`` matrix of :func:`lambda_direct`; zero diagonal."""
    n = caps.size
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i != j:
                out[i, j] = lambda_direct(caps, i, j)
    return out


def _read_rows(path: Path):
    try:
        with open(path, newline="") as fh:
            lines = [ln for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    except OSError as exc:
        raise DatasetError(f"cannot read {path}: {exc}") from exc
    rows = list(csv.DictReader(lines))
    if not rows:
        raise DatasetError(f"{path} has no data rows")
    return rows


def load_capacitance_set(coupling_csv, self_csv, z_ohm: float = 50.0) -> CapacitanceSet:
    """Read couplings ``(i, j, c_ff)`` and the self table ``(i, c_self_ff, frequency_ghz)``.

    Qubit ids may be any labels; they are indexed in the order of the self
    table.  Couplings absent from the file are zero.
    """
    selfs = _read_rows(Path(self_csv))
    need = {"i", "c_self_ff", "frequency_ghz"}
    if not need <= set(selfs[0]):
        raise DatasetError(f"self table needs columns {sorted(need)}")
    labels = [r["i"] for r in selfs]
    if len(set(labels)) != len(labels):
        raise DatasetError("duplicate qubit in self table")
    index: Dict[str, int] = {q: k for k, q in enumerate(labels)}
    n = len(labels)
    try:
        c = np.array([float(r["c_self_ff"]) for r in selfs])
        f = np.array([float(r["frequency_ghz"]) for r in selfs])
    except ValueError as exc:
        raise DatasetError(f"non-numeric value in self table: {exc}") from exc

    k = np.zeros((n, n))
    seen = set()
    for r in _read_rows(Path(coupling_csv)):
        if not {"i", "j", "c_ff"} <= set(r):
            raise DatasetError("coupling file needs columns i, j, c_ff")
        try:
            a, b = index[r["i"]], index[r["j"]]
        except KeyError as exc:
            raise DatasetError(f"unknown qubit {exc} in coupling file") from exc
        if (a, b) in seen:
            raise DatasetError(f"duplicate coupling ({r['i']}, {r['j']})")
        seen.add((a, b))
        try:
            k[a, b] = float(r["c_ff"])
        except ValueError as exc:
            raise DatasetError(f"non-numeric capacitance: {exc}") from exc
    try:
        return CapacitanceSet(c, k, f, z_ohm, tuple(labels))
    except ContractViolation as exc:
        raise DatasetError(str(exc)) from exc
