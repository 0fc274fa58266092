"""Pure-NumPy statevector kernels.

Vectorized counterparts of the numba kernels.  Index convention: bit ``q``
of a flat amplitude index is the computational state of qubit ``q`` (qubit
0 is the least-significant bit).
"""

from __future__ import annotations

import numpy as np


def _local_offsets(targets: tuple[int, ...]) -> np.ndarray:
    """Global index offset of each local basis state of the target qubits.

    Local basis index ``a`` has bit ``p`` equal to the state of qubit
    ``targets[p]`` (``targets[0]`` is the local least-significant bit).
    """
    k = len(targets)
    a = np.arange(1 << k, dtype=np.int64)
    offs = np.zeros(1 << k, dtype=np.int64)
    for p, t in enumerate(targets):
        offs += ((a >> p) & 1) << t
    return offs


def _group_bases(num_qubits: int, targets: tuple[int, ...]) -> np.ndarray:
    """All indices whose bits vanish on every target qubit."""
    g = np.arange(1 << (num_qubits - len(targets)), dtype=np.int64)
    for t in sorted(targets):
        low = g & ((1 << t) - 1)
        g = ((g >> t) << (t + 1)) | low
    return g


def apply_matrix(
    amps: np.ndarray,
    mat: np.ndarray,
    targets: tuple[int, ...],
    num_qubits: int,
) -> np.ndarray:
    """Apply a ``2^k x 2^k`` matrix to the target qubits of ``amps``."""
    offs = _local_offsets(targets)
    base = _group_bases(num_qubits, targets)
    idx = base[:, None] + offs[None, :]
    out = np.empty_like(amps)
    out[idx] = amps[idx] @ mat.T
    return out


def apply_diag_phase(amps: np.ndarray, phase: np.ndarray) -> np.ndarray:
    """Multiply amplitudes elementwise by a diagonal phase vector."""
    return amps * phase


def apply_pauli_sum(
    amps: np.ndarray,
    flips: np.ndarray,
    sign_masks: np.ndarray,
    weights: np.ndarray,
) -> np.ndarray:
    """Apply ``sum_t w_t P_t`` where each Pauli string is bit-encoded.

    Term ``t`` maps ``|b> -> w_t * (-1)^{popcount(b & sign_masks[t])}
    |b XOR flips[t]>``.
    """
    dim = amps.shape[0]
    idx = np.arange(dim, dtype=np.int64)
    out = np.zeros(dim, dtype=np.complex128)
    for f, msk, w in zip(flips, sign_masks, weights):
        signs = 1.0 - 2.0 * (np.bitwise_count(idx & msk) & 1)
        # idx ^ f is a permutation, so fancy-index accumulation is safe.
        out[idx ^ f] += (w * signs) * amps
    return out
