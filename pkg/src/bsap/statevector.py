"""Dense statevector type and elementary operations.

Amplitude index convention: bit ``q`` of the flat index is the state of
qubit ``q``, so qubit 0 is the least-significant bit and the basis state
with index ``i`` is ``|b_{L-1} ... b_1 b_0>`` with ``b_q = (i >> q) & 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels

ATOL_UNITARY = 1e-12


@dataclass(frozen=True)
class GateMatrix:
    """A unitary on ``arity`` qubits, stored dense.

    The row/column basis ordering follows the target-list convention of
    ``apply_gate``: local bit ``p`` belongs to the ``p``-th target qubit.
    """

    arity: int
    entries: np.ndarray

    def __post_init__(self) -> None:
        m = 1 << self.arity
        ent = np.asarray(self.entries, dtype=np.complex128)
        if ent.shape != (m, m):
            raise ValueError(f"gate on {self.arity} qubits must be {m}x{m}, got {ent.shape}")
        err = np.max(np.abs(ent.conj().T @ ent - np.eye(m)))
        if err > ATOL_UNITARY:
            raise ValueError(f"gate entries are not unitary (deviation {err:.3e})")
        object.__setattr__(self, "entries", ent)

    @property
    def is_real(self) -> bool:
        return bool(np.max(np.abs(self.entries.imag)) <= ATOL_UNITARY)


@dataclass(frozen=True)
class StateVector:
    """Normalized (by construction sites) dense state of ``num_qubits`` qubits."""

    num_qubits: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.ndim != 1 or amps.shape[0] != (1 << self.num_qubits):
            raise ValueError(
                f"amplitude array must have length 2**{self.num_qubits}, got shape {amps.shape}"
            )
        if not np.all(np.isfinite(amps.view(np.float64))):
            raise ValueError("amplitudes must be finite")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return 1 << self.num_qubits

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def basis_state(num_qubits: int, index: int) -> StateVector:
    """Computational basis state ``|index>``."""
    if not 0 <= index < (1 << num_qubits):
        raise ValueError(f"basis index {index} out of range for {num_qubits} qubits")
    amps = np.zeros(1 << num_qubits, dtype=np.complex128)
    amps[index] = 1.0
    return StateVector(num_qubits, amps)


def bits_to_index(bits: tuple[int, ...]) -> int:
    """Flat index of a site-indexed bit tuple (``bits[0]`` is qubit 0)."""
    idx = 0
    for q, b in enumerate(bits):
        if b not in (0, 1):
            raise ValueError(f"bits must be 0/1, got {bits!r}")
        idx |= b << q
    return idx


def index_to_bits(index: int, num_qubits: int) -> tuple[int, ...]:
    return tuple((index >> q) & 1 for q in range(num_qubits))


def apply_gate(state: StateVector, gate: GateMatrix, targets: tuple[int, ...]) -> StateVector:
    """Apply ``gate`` to the listed target qubits (``targets[0]`` = local LSB)."""
    if len(targets) != gate.arity:
        raise ValueError(f"gate arity {gate.arity} does not match {len(targets)} targets")
    if len(set(targets)) != len(targets):
        raise ValueError(f"target qubits must be distinct, got {targets!r}")
    for t in targets:
        if not 0 <= t < state.num_qubits:
            raise ValueError(f"target qubit {t} out of range for {state.num_qubits} qubits")
    out = kernels.apply_matrix(state.amplitudes, gate.entries, tuple(targets), state.num_qubits)
    return StateVector(state.num_qubits, out)


def apply_diag_phase(state: StateVector, phase: np.ndarray) -> StateVector:
    """Multiply by a precomputed diagonal phase vector (length ``2**L``)."""
    phase = np.asarray(phase, dtype=np.complex128)
    if phase.shape != (state.dim,):
        raise ValueError("phase vector length must match the state dimension")
    return StateVector(state.num_qubits, kernels.apply_diag_phase(state.amplitudes, phase))


def inner(bra: StateVector, ket: StateVector) -> complex:
    """`<bra|ket>` with the bra conjugated."""
    if bra.num_qubits != ket.num_qubits:
        raise ValueError("states live on different qubit counts")
    return complex(np.vdot(bra.amplitudes, ket.amplitudes))


def superpose(a: StateVector, b: StateVector, ca: complex, cb: complex) -> StateVector:
    """Linear combination ``ca*a + cb*b`` (not renormalized)."""
    if a.num_qubits != b.num_qubits:
        raise ValueError("states live on different qubit counts")
    return StateVector(a.num_qubits, ca * a.amplitudes + cb * b.amplitudes)


def normalized(state: StateVector) -> StateVector:
    n = state.norm()
    if n == 0.0:
        raise ValueError("cannot normalize the zero vector")
    return StateVector(state.num_qubits, state.amplitudes / n)
