"""Numba-jitted statevector kernels (bitmask stride iteration).

Same contracts as :mod:`bsap.kernels.numpy_backend`; the inner loops walk
the amplitude array once per gate with precomputed target-bit offsets.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _apply_matrix_kernel(amps, mat, targets_sorted, offs, out):  # pragma: no cover - jitted
    k = targets_sorted.shape[0]
    m = offs.shape[0]
    groups = amps.shape[0] >> k
    sub = np.empty(m, np.complex128)
    for g in range(groups):
        base = np.int64(g)
        for j in range(k):
            t = targets_sorted[j]
            low = base & ((np.int64(1) << t) - 1)
            base = ((base >> t) << (t + 1)) | low
        for a in range(m):
            sub[a] = amps[base + offs[a]]
        for a in range(m):
            acc = 0.0 + 0.0j
            for b in range(m):
                acc += mat[a, b] * sub[b]
            out[base + offs[a]] = acc


@njit(cache=True)
def _diag_phase_kernel(amps, phase, out):  # pragma: no cover - jitted
    for i in range(amps.shape[0]):
        out[i] = amps[i] * phase[i]


@njit(cache=True)
def _pauli_sum_kernel(amps, flips, sign_masks, weights, out):  # pragma: no cover - jitted
    dim = amps.shape[0]
    for t in range(flips.shape[0]):
        f = flips[t]
        msk = sign_masks[t]
        w = weights[t]
        for i in range(dim):
            x = np.int64(i) & msk
            x ^= x >> 32
            x ^= x >> 16
            x ^= x >> 8
            x ^= x >> 4
            x ^= x >> 2
            x ^= x >> 1
            if x & 1:
                out[i ^ f] -= w * amps[i]
            else:
                out[i ^ f] += w * amps[i]


def apply_matrix(
    amps: np.ndarray,
    mat: np.ndarray,
    targets: tuple[int, ...],
    num_qubits: int,
) -> np.ndarray:
    k = len(targets)
    a = np.arange(1 << k, dtype=np.int64)
    offs = np.zeros(1 << k, dtype=np.int64)
    for p, t in enumerate(targets):
        offs += ((a >> p) & 1) << t
    ts = np.array(sorted(targets), dtype=np.int64)
    amps_c = np.ascontiguousarray(amps, dtype=np.complex128)
    mat_c = np.ascontiguousarray(mat, dtype=np.complex128)
    out = np.empty_like(amps_c)
    _apply_matrix_kernel(amps_c, mat_c, ts, offs, out)
    return out


def apply_diag_phase(amps: np.ndarray, phase: np.ndarray) -> np.ndarray:
    amps_c = np.ascontiguousarray(amps, dtype=np.complex128)
    phase_c = np.ascontiguousarray(phase, dtype=np.complex128)
    out = np.empty_like(amps_c)
    _diag_phase_kernel(amps_c, phase_c, out)
    return out


def apply_pauli_sum(
    amps: np.ndarray,
    flips: np.ndarray,
    sign_masks: np.ndarray,
    weights: np.ndarray,
) -> np.ndarray:
    amps_c = np.ascontiguousarray(amps, dtype=np.complex128)
    out = np.zeros_like(amps_c)
    _pauli_sum_kernel(
        amps_c,
        np.ascontiguousarray(flips, dtype=np.int64),
        np.ascontiguousarray(sign_masks, dtype=np.int64),
        np.ascontiguousarray(weights, dtype=np.complex128),
        out,
    )
    return out
