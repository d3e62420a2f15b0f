"""Square qubit lattices with two-subgroup frequency allocation.

Qubits sit on an ``n x n`` grid, indexed row-major from the top-left corner.
Eight design frequencies are tiled with a 2 x 4 unit cell so that every
nearest-neighbour pair pairs a subgroup-a qubit with a subgroup-b qubit::

    a1 b1 a2 b2
    b3 a4 b4 a3

Column 1 stacks ``b1`` on ``a4``, which puts the highest a-frequency next to
the lowest b-frequency; the smallest nearest-neighbour detuning of the default
plan is therefore ``b1 - a4``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .crosstalk import XY_DB, CrosstalkMatrix, LinearCrosstalkModel
from .errors import ConfigurationError, ContractViolation

SUBGROUPS = ("a1", "a2", "a3", "a4", "b1", "b2", "b3", "b4")

UNIT_CELL = (
    ("a1", "b1", "a2", "b2"),
    ("b3", "a4", "b4", "a3"),
)
CELL_ROWS, CELL_COLS = 2, 4

DEFAULT_PITCH_MM = 2.0


@dataclass(frozen=True)
class FrequencyPlan:
    """Design frequencies (GHz) of the two subgroups, four each.

    ``anharmonicity_mhz`` is per subgroup ``(a, b)`` and is carried as
    metadata; subgroup a has the lower frequencies and anharmonicities.
    """

    a: Tuple[float, float, float, float] = (4.20, 4.26, 4.32, 4.38)
    b: Tuple[float, float, float, float] = (4.80, 4.86, 4.92, 4.98)
    anharmonicity_mhz: Tuple[float, float] = (-240.0, -200.0)

    def __post_init__(self):
        for name in ("a", "b"):
            vals = tuple(float(v) for v in getattr(self, name))
            if len(vals) != 4:
                raise ConfigurationError(
                    f"frequency plan needs 4 frequencies in subgroup {name}, got {len(vals)}"
                )
            if not all(np.isfinite(v) and v > 0 for v in vals):
                raise ConfigurationError(f"subgroup {name} frequencies must be positive")
            object.__setattr__(self, name, vals)

    @classmethod
    def from_sequence(cls, freqs: Sequence[float], **kw) -> "FrequencyPlan":
        freqs = list(freqs)
        if len(freqs) != 8:
            raise ConfigurationError(f"frequency plan needs 8 frequencies, got {len(freqs)}")
        return cls(a=tuple(freqs[:4]), b=tuple(freqs[4:]), **kw)

    def frequency(self, label: str) -> float:
        group, k = label[0], int(label[1]) - 1
        return (self.a if group == "a" else self.b)[k]

    def frequencies(self) -> np.ndarray:
        """The eight frequencies ordered a1..a4, b1..b4."""
        return np.array(self.a + self.b)

    def anharmonicity(self, label: str) -> float:
        return self.anharmonicity_mhz[0 if label[0] == "a" else 1]

    def min_neighbour_detuning(self) -> float:
        """Smallest detuning (GHz) between unit-cell neighbours, with wrap-around."""
        best = np.inf
        for r in range(CELL_ROWS):
            for c in range(CELL_COLS):
                f = self.frequency(UNIT_CELL[r][c])
                for dr, dc in ((1, 0), (0, 1)):
                    g = self.frequency(UNIT_CELL[(r + dr) % CELL_ROWS][(c + dc) % CELL_COLS])
                    best = min(best, abs(f - g))
        return float(best)


@dataclass(frozen=True)
class QubitSite:
    index: int
    row: int
    col: int
    position: Tuple[float, float]
    frequency: float
    subgroup: str
    anharmonicity: float = 0.0

    @property
    def is_a(self) -> bool:
        return self.subgroup.startswith("a")


@dataclass(frozen=True)
class CouplerSite:
    index: int
    qubits: Tuple[int, int]
    orientation: str
    position: Tuple[float, float]


def subgroup_at(row: int, col: int, offset: Tuple[int, int] = (0, 0)) -> str:
    return UNIT_CELL[(row + offset[0]) % CELL_ROWS][(col + offset[1]) % CELL_COLS]


def offset_for_center(n: int, label: str) -> Tuple[int, int]:
    """Tiling offset that puts subgroup ``label`` on the centre site."""
    c = n // 2
    for dr in range(CELL_ROWS):
        for dc in range(CELL_COLS):
            if subgroup_at(c, c, (dr, dc)) == label:
                return dr, dc
    raise ConfigurationError(f"unknown subgroup {label!r}")


@dataclass(frozen=True)
class LatticeDevice:
    n: int
    pitch: float
    sites: Tuple[QubitSite, ...]
    couplers: Tuple[CouplerSite, ...]
    plan: FrequencyPlan
    xy_model: LinearCrosstalkModel = field(default_factory=LinearCrosstalkModel)
    flux_matrix: Optional[CrosstalkMatrix] = None

    @property
    def num_qubits(self) -> int:
        return len(self.sites)

    def positions(self) -> np.ndarray:
        return np.array([s.position for s in self.sites])

    def frequencies(self) -> np.ndarray:
        return np.array([s.frequency for s in self.sites])

    def site(self, row: int, col: int) -> QubitSite:
        return self.sites[row * self.n + col]

    def center_index(self) -> int:
        return (self.n // 2) * self.n + self.n // 2

    def _check(self, i: int):
        if not 0 <= i < self.num_qubits:
            raise ContractViolation(f"qubit index {i} out of range 0..{self.num_qubits - 1}")

    def distance(self, i: int, j: int) -> float:
        self._check(i)
        self._check(j)
        (xi, yi), (xj, yj) = self.sites[i].position, self.sites[j].position
        return float(np.hypot(xi - xj, yi - yj))

    def distance_matrix(self) -> np.ndarray:
        p = self.positions()
        return np.hypot(p[:, None, 0] - p[None, :, 0], p[:, None, 1] - p[None, :, 1])

    def xy_matrix(self) -> CrosstalkMatrix:
        """Directional xy crosstalk implied by the distance model."""
        return CrosstalkMatrix(XY_DB, self.xy_model(self.distance_matrix()))

    def xy_crosstalk_db(self, victim: int, source: int) -> float:
        return float(self.xy_model(self.distance(victim, source)))

    def neighbour_pairs(self):
        return [c.qubits for c in self.couplers]


def build_lattice(
    n: int,
    pitch: float = DEFAULT_PITCH_MM,
    frequency_plan: Optional[FrequencyPlan] = None,
    xy_model: Optional[LinearCrosstalkModel] = None,
    flux_matrix: Optional[CrosstalkMatrix] = None,
    offset: Tuple[int, int] = (0, 0),
) -> LatticeDevice:
    """Build an ``n x n`` lattice tiled with the 2 x 4 frequency unit cell.

    ``offset`` shifts the tiling by whole rows/columns, which is how the
    error-budget simulations give the centre qubit each of the eight
    frequencies in turn.
    """
    if int(n) != n or n < 1:
        raise ConfigurationError(f"lattice side must be a positive integer, got {n!r}")
    n = int(n)
    if not pitch > 0:
        raise ConfigurationError(f"pitch must be positive, got {pitch!r}")
    plan = FrequencyPlan() if frequency_plan is None else frequency_plan
    if not isinstance(plan, FrequencyPlan):
        plan = FrequencyPlan.from_sequence(plan)

    sites = []
    for r in range(n):
        for c in range(n):
            label = subgroup_at(r, c, offset)
            sites.append(
                QubitSite(
                    index=r * n + c,
                    row=r,
                    col=c,
                    position=(c * pitch, r * pitch),
                    frequency=plan.frequency(label),
                    subgroup=label,
                    anharmonicity=plan.anharmonicity(label),
                )
            )

    couplers = []
    for r in range(n):
        for c in range(n):
            i = r * n + c
            if c + 1 < n:
                couplers.append((i, i + 1, "horizontal"))
            if r + 1 < n:
                couplers.append((i, i + n, "vertical"))
    coupler_sites = tuple(
        CouplerSite(
            index=k,
            qubits=(i, j),
            orientation=o,
            position=(
                0.5 * (sites[i].position[0] + sites[j].position[0]),
                0.5 * (sites[i].position[1] + sites[j].position[1]),
            ),
        )
        for k, (i, j, o) in enumerate(couplers)
    )
    if flux_matrix is not None and flux_matrix.size != len(coupler_sites):
        raise ConfigurationError(
            f"flux matrix has size {flux_matrix.size}, lattice has {len(coupler_sites)} couplers"
        )
    return LatticeDevice(
        n=n,
        pitch=float(pitch),
        sites=tuple(sites),
        couplers=coupler_sites,
        plan=plan,
        xy_model=xy_model or LinearCrosstalkModel(),
        flux_matrix=flux_matrix,
    )


def qubit_distance(device: LatticeDevice, i: int, j: int) -> float:
    """Centre-to-centre distance in mm between qubits ``i`` and ``j``."""
    return device.distance(i, j)
