"""Crosstalk quantities: dB conversions, the distance model and directional matrices."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ContractViolation

XY_DB = "xy_db"
FLUX_SIGNED = "flux_signed"
KINDS = (XY_DB, FLUX_SIGNED)


def db_to_amplitude_ratio(lambda_db):
    """Amplitude ratio ``10**(dB/20)`` (e.g. a Rabi-frequency ratio)."""
    return np.power(10.0, np.asarray(lambda_db, dtype=float) / 20.0)[()]


def amplitude_ratio_to_db(ratio):
    """Inverse of :func:`db_to_amplitude_ratio`; ratio must be positive."""
    r = np.asarray(ratio, dtype=float)
    if np.any(~(r > 0)):
        raise ContractViolation("amplitude ratio must be positive to express in dB")
    return (20.0 * np.log10(r))[()]


def rabi_ratio_to_db(omega_victim, omega_self):
    """Crosstalk in dB from two Rabi rates, ``10 log10((victim/self)**2)``."""
    if omega_victim <= 0 or omega_self <= 0:
        raise ContractViolation("Rabi rates must be positive")
    return 10.0 * np.log10((omega_victim / omega_self) ** 2)


@dataclass(frozen=True)
class LinearCrosstalkModel:
    """Average xy crosstalk falling linearly (in dB) with qubit separation.

    ``Lambda(d) = m_xy * d + lambda0`` for ``d > 0``; a qubit's own line is
    0 dB by definition.
    """

    m_xy: float = -1.1
    lambda0: float = -33.9

    def __call__(self, d):
        d = np.asarray(d, dtype=float)
        if np.any(d < 0):
            raise ContractViolation("distance must be non-negative")
        return np.where(d > 0, self.m_xy * d + self.lambda0, 0.0)[()]


def model_crosstalk_db(model: LinearCrosstalkModel, d):
    return model(d)


@dataclass(frozen=True, eq=False)
class CrosstalkMatrix:
    """Directional crosstalk indexed ``[victim, source]``.

    ``xy_db`` matrices hold dB values with a 0 dB diagonal.  ``flux_signed``
    matrices hold signed flux-per-flux slopes with a unit diagonal, so that
    ``entries @ applied_flux`` is the flux seen by every SQUID.  The matrix is
    never assumed symmetric.
    """

    kind: str
    entries: np.ndarray
    labels: Optional[tuple] = field(default=None)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ContractViolation(f"unknown crosstalk kind {self.kind!r}")
        e = np.array(self.entries, dtype=float)
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise ContractViolation(f"crosstalk matrix must be square, got {e.shape}")
        diag = 0.0 if self.kind == XY_DB else 1.0
        if not np.allclose(np.diag(e), diag, rtol=0, atol=1e-12):
            raise ContractViolation(f"{self.kind} diagonal must be {diag}")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != e.shape[0]:
                raise ContractViolation("labels must match matrix size")
            object.__setattr__(self, "labels", labels)

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    def __eq__(self, other):
        if not isinstance(other, CrosstalkMatrix):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.labels == other.labels
            and np.array_equal(self.entries, other.entries)
        )

    def magnitude(self) -> np.ndarray:
        """``|beta|`` for flux matrices, as reported in measurements."""
        return np.abs(self.entries)

    def amplitude_ratios(self) -> np.ndarray:
        if self.kind != XY_DB:
            raise ContractViolation("amplitude ratios are defined for xy matrices only")
        return db_to_amplitude_ratio(self.entries)

    def off_diagonal(self) -> np.ndarray:
        mask = ~np.eye(self.size, dtype=bool)
        return self.entries[mask]

    @classmethod
    def identity(cls, n: int, kind: str = FLUX_SIGNED, labels: Optional[Sequence] = None):
        e = np.eye(n) if kind == FLUX_SIGNED else np.zeros((n, n))
        return cls(kind, e, labels=tuple(labels) if labels is not None else None)
