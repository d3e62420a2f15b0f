"""Dense Hilbert-space tools and a fixed-step Schrödinger integrator.

Conventions used throughout the package:

* ``|0>`` is the ground state and the +1 eigenstate of ``SIGMA_Z``; ``|1>``
  is the excited state.  ``SIGMA_PLUS`` raises ``|0> -> |1>``.
* Composite systems put the qubit on the left tensor factor and the coupler on
  the right, so the basis order is ``|q c> = |00>, |01>, |10>, |11>``.
* Hamiltonians are in rad/ns and times in ns, so ``hbar`` drops out of
  ``i d(psi)/dt = H psi``.

States may carry a leading batch axis (shape ``(B, dim)``); envelopes then
return arrays of shape ``(B,)`` and every batch member is integrated in
lock-step.  The virtual Ramsey experiments rely on this to integrate many
idle times at once.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence, Union

import numpy as np

from .errors import ContractViolation, NumericalError

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_PLUS = np.array([[0, 0], [1, 0]], dtype=complex)
SIGMA_MINUS = SIGMA_PLUS.T.copy()

Envelope = Union[complex, float, Callable[[float], Union[complex, np.ndarray]]]


def basis(dim: int, k: int) -> np.ndarray:
    """Computational basis vector ``|k>`` of a ``dim``-level space."""
    if not 0 <= k < dim:
        raise ContractViolation(f"basis index {k} out of range for dim {dim}")
    v = np.zeros(dim, dtype=complex)
    v[k] = 1.0
    return v


def ground(dim: int = 2) -> np.ndarray:
    return basis(dim, 0)


def plus_state() -> np.ndarray:
    """``(|0> + |1>)/sqrt(2)``, the +1 eigenstate of ``SIGMA_X``."""
    return np.array([1.0, 1.0], dtype=complex) / np.sqrt(2.0)


def state_vector(amplitudes, atol: float = 1e-9) -> np.ndarray:
    """Validate amplitudes as a normalized 2- or 4-level state."""
    psi = np.asarray(amplitudes, dtype=complex)
    if psi.ndim != 1 or psi.size not in (2, 4):
        raise ContractViolation(f"state must have dim 2 or 4, got shape {psi.shape}")
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > atol:
        raise ContractViolation(f"state is not normalized (norm={norm!r})")
    return psi


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product ``a ⊗ b`` with ``a`` as the slow (left) factor."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def is_hermitian(op: np.ndarray, atol: float = 1e-12) -> bool:
    op = np.asarray(op)
    return op.ndim == 2 and op.shape[0] == op.shape[1] and np.allclose(op, op.conj().T, atol=atol)


def expectation(state: np.ndarray, op: np.ndarray, imag_tol: float = 1e-10):
    """Real expectation value ``<psi|O|psi>`` of a Hermitian operator.

    ``state`` may be batched along its first axis, in which case an array of
    expectation values is returned.
    """
    op = np.asarray(op, dtype=complex)
    if not is_hermitian(op):
        raise ContractViolation("expectation requires a Hermitian operator")
    psi = np.asarray(state, dtype=complex)
    if psi.shape[-1] != op.shape[0]:
        raise ContractViolation(
            f"operator dim {op.shape[0]} does not match state dim {psi.shape[-1]}"
        )
    val = np.einsum("...i,ij,...j->...", psi.conj(), op, psi)
    if np.max(np.abs(np.imag(val))) > imag_tol:
        raise NumericalError("expectation value has a non-negligible imaginary part")
    return np.real(val) if np.ndim(val) else float(np.real(val))


@dataclass
class TimeDependentHamiltonian:
    """``H(t) = sum_k c_k(t) O_k`` with scalar (or batched) envelopes ``c_k``."""

    dim: int
    ops: list = field(default_factory=list)
    envelopes: list = field(default_factory=list)
    _flat: Optional[np.ndarray] = field(default=None, init=False, repr=False, compare=False)
    _static: Optional[np.ndarray] = field(default=None, init=False, repr=False, compare=False)

    def add(self, op, envelope: Envelope = 1.0) -> "TimeDependentHamiltonian":
        op = np.asarray(op, dtype=complex)
        if op.shape != (self.dim, self.dim):
            raise ContractViolation(f"term has shape {op.shape}, expected {(self.dim, self.dim)}")
        self.ops.append(op)
        self.envelopes.append(envelope)
        return self

    def add_hc(self, op, envelope: Envelope) -> "TimeDependentHamiltonian":
        """Add ``c(t) O + conj(c(t)) O^dagger`` so the pair stays Hermitian."""
        op = np.asarray(op, dtype=complex)
        self.add(op, envelope)
        if callable(envelope):
            self.add(op.conj().T, lambda t, f=envelope: np.conj(f(t)))
        else:
            self.add(op.conj().T, np.conj(envelope))
        return self

    def coefficients(self, t: float) -> np.ndarray:
        """Envelope values at ``t``, shape ``(K,)`` or ``(K, B)``."""
        vals = [f(t) if callable(f) else f for f in self.envelopes]
        shape = np.broadcast_shapes(*(np.shape(v) for v in vals))
        out = np.empty((len(vals),) + shape, dtype=complex)
        for k, v in enumerate(vals):
            out[k] = v
        return out

    def __call__(self, t: float) -> np.ndarray:
        """Matrix at time ``t``; shape ``(dim, dim)`` or ``(B, dim, dim)``."""
        if not self.ops:
            return np.zeros((self.dim, self.dim), dtype=complex)
        if self._flat is None or self._flat.shape[0] != len(self.ops):
            self._flat = np.stack(self.ops).reshape(len(self.ops), -1)
            self._static = None
            if not any(callable(f) for f in self.envelopes):
                self._static = self._assemble(self.coefficients(0.0))
        if self._static is not None:
            return self._static
        return self._assemble(self.coefficients(t))

    def static_matrix(self) -> Optional[np.ndarray]:
        """The matrix when no envelope depends on time, else ``None``."""
        if not self.ops:
            return None
        self(0.0)
        return self._static

    def _assemble(self, c: np.ndarray) -> np.ndarray:
        # non-finite envelopes are reported by the integrator, not here
        with np.errstate(invalid="ignore", over="ignore"):
            m = c.T @ self._flat
        return m.reshape(c.shape[1:] + (self.dim, self.dim))


@dataclass
class EvolutionResult:
    times: np.ndarray
    expectations: Dict[str, np.ndarray]
    final_state: np.ndarray
    states: Optional[np.ndarray] = None

    def __getitem__(self, name: str) -> np.ndarray:
        return self.expectations[name]


def _rhs(H: TimeDependentHamiltonian, t: float, psi: np.ndarray) -> np.ndarray:
    h = H(t)
    if not np.all(np.isfinite(h)):
        raise NumericalError(f"non-finite Hamiltonian envelope at t={t:g} ns", time=float(t))
    if h.ndim == 2:
        return -1j * (psi @ h.T)
    return -1j * np.matmul(h, psi[..., None])[..., 0]


def rk4_step(H: TimeDependentHamiltonian, t: float, psi: np.ndarray, h: float) -> np.ndarray:
    k1 = _rhs(H, t, psi)
    k2 = _rhs(H, t + 0.5 * h, psi + 0.5 * h * k1)
    k3 = _rhs(H, t + 0.5 * h, psi + 0.5 * h * k2)
    k4 = _rhs(H, t + h, psi + h * k3)
    return psi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_step_matrix(H: np.ndarray, h: float) -> np.ndarray:
    """Linear map of one RK4 step for a constant Hamiltonian.

    RK4 applied to ``psi' = A psi`` reproduces the Taylor polynomial of
    ``exp(A h)`` to fourth order, so the step can be precomputed.
    """
    A = -1j * h * np.asarray(H, dtype=complex)
    eye = np.broadcast_to(np.eye(A.shape[-1], dtype=complex), A.shape)
    A2 = A @ A
    return eye + A + A2 / 2.0 + (A2 @ A) / 6.0 + (A2 @ A2) / 24.0


def evolve(
    H: TimeDependentHamiltonian,
    psi0,
    t_grid: Sequence[float],
    step: float,
    e_ops: Optional[Dict[str, np.ndarray]] = None,
    store_states: bool = False,
) -> EvolutionResult:
    """Integrate ``i d(psi)/dt = H(t) psi`` with classical fixed-step RK4.

    The state starts at ``t_grid[0]``.  Each interval between consecutive
    grid points is split into the smallest number of equal sub-steps not
    longer than ``step``, so output times are hit exactly.  The state is
    never renormalized.

    :param H: Hamiltonian in rad/ns.
    :param psi0: initial state, shape ``(dim,)`` or batched ``(B, dim)``.
    :param t_grid: strictly increasing output times in ns.
    :param step: maximum integration step in ns.
    :param e_ops: named Hermitian observables recorded at every grid time.
    :param store_states: also keep the full state at every grid time.
    """
    if step <= 0:
        raise ContractViolation("step must be positive")
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size == 0:
        raise ContractViolation("t_grid must be a non-empty 1-d sequence")
    if t_grid.size > 1 and np.any(np.diff(t_grid) <= 0):
        raise ContractViolation("t_grid must be strictly increasing")
    psi = np.array(psi0, dtype=complex)
    if psi.shape[-1] != H.dim:
        raise ContractViolation(f"state dim {psi.shape[-1]} does not match Hamiltonian dim {H.dim}")
    e_ops = dict(e_ops or {})
    for name, op in e_ops.items():
        if np.shape(op) != (H.dim, H.dim):
            raise ContractViolation(f"observable {name!r} has wrong shape {np.shape(op)}")
        if not is_hermitian(op):
            raise ContractViolation(f"observable {name!r} is not Hermitian")
    # checked once above, so the per-step evaluation can skip validation
    e_ops = {name: np.asarray(op, dtype=complex) for name, op in e_ops.items()}

    traces = {name: [] for name in e_ops}
    states = []

    def record(state):
        for name, op in e_ops.items():
            traces[name].append(np.real(np.einsum("...i,ij,...j->...", state.conj(), op, state)))
        if store_states:
            states.append(state.copy())

    static = H.static_matrix()
    if static is not None and not np.all(np.isfinite(static)):
        raise NumericalError("non-finite Hamiltonian coefficient", time=float(t_grid[0]))
    step_maps: Dict[float, np.ndarray] = {}

    record(psi)
    for t0, t1 in zip(t_grid[:-1], t_grid[1:]):
        n_sub = max(1, int(np.ceil((t1 - t0) / step - 1e-9)))
        h = (t1 - t0) / n_sub
        if static is not None:
            M = step_maps.get(h)
            if M is None:
                M = step_maps[h] = rk4_step_matrix(static, h)
            for _ in range(n_sub):
                psi = np.matmul(M, psi[..., None])[..., 0] if M.ndim == 3 else psi @ M.T
        else:
            t = t0
            for _ in range(n_sub):
                psi = rk4_step(H, t, psi, h)
                t += h
        if not np.all(np.isfinite(psi)):
            raise NumericalError(f"state became non-finite before t={t1:g} ns", time=float(t1))
        record(psi)

    return EvolutionResult(
        times=t_grid,
        expectations={k: np.asarray(v) for k, v in traces.items()},
        final_state=psi,
        states=np.asarray(states) if store_states else None,
    )


def propagate_static(H: np.ndarray, psi0, t: float) -> np.ndarray:
    """Exact propagation under a constant Hamiltonian via eigendecomposition."""
    H = np.asarray(H, dtype=complex)
    w, v = np.linalg.eigh(H)
    return v @ (np.exp(-1j * w * t) * (v.conj().T @ np.asarray(psi0, dtype=complex)))


def excited_population(state: np.ndarray) -> np.ndarray:
    """Population of ``|1>`` for a single qubit, ``(1 - <Z>)/2``."""
    return 0.5 * (1.0 - expectation(state, SIGMA_Z))
