"""Pauli-sum Hamiltonians for the XYZ ring and its two starting points.

Terms are stored symbolically as coefficient/letter-string pairs; dense
matrices and eigensolves are only formed on demand (and guarded for size).
Letter strings are site-indexed: ``letters[q]`` is the Pauli on qubit ``q``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import kernels
from .errors import ConfigError, ResourceLimitError
from .statevector import StateVector

DENSE_QUBIT_LIMIT = 12

_PAULI_REAL = {
    "I": np.eye(2),
    "X": np.array([[0.0, 1.0], [1.0, 0.0]]),
    # Y is stored as -i*Y (real); the dropped factor i is restored per term.
    "Y": np.array([[0.0, -1.0], [1.0, 0.0]]),
    "Z": np.array([[1.0, 0.0], [0.0, -1.0]]),
}


@dataclass(frozen=True)
class PauliTerm:
    coefficient: float
    letters: str

    def __post_init__(self) -> None:
        if not self.letters or any(c not in "IXYZ" for c in self.letters):
            raise ValueError(f"letters must be a nonempty string over IXYZ, got {self.letters!r}")
        if not math.isfinite(self.coefficient):
            raise ValueError(f"coefficient must be finite, got {self.coefficient!r}")


@dataclass(frozen=True)
class HamiltonianSpec:
    num_qubits: int
    terms: tuple[PauliTerm, ...]
    couplings: tuple[float, float, float] | None = None

    def __post_init__(self) -> None:
        if self.num_qubits < 1:
            raise ValueError("num_qubits must be positive")
        object.__setattr__(self, "terms", tuple(self.terms))
        for t in self.terms:
            if len(t.letters) != self.num_qubits:
                raise ValueError(
                    f"term {t.letters!r} does not act on {self.num_qubits} qubits"
                )


@dataclass(frozen=True)
class EigenSolution:
    """Ascending eigenvalues, matching eigenvector columns, and near-degenerate
    clusters (half-open index ranges into the ascending order)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    cluster_tolerance: float | None
    clusters: tuple[tuple[int, int], ...]

    @property
    def num_clusters(self) -> int:
        return len(self.clusters)

    def cluster_of(self, eigen_index: int) -> int:
        for c, (lo, hi) in enumerate(self.clusters):
            if lo <= eigen_index < hi:
                return c
        raise IndexError(f"eigenvalue index {eigen_index} out of range")

    def cluster_projector_coefficients(self, cluster: int, amps: np.ndarray) -> np.ndarray:
        """Components of ``amps`` along the cluster's eigenvectors."""
        lo, hi = self.clusters[cluster]
        return self.eigenvectors[:, lo:hi].conj().T @ amps


def _ring_string(L: int, letter: str, i: int) -> str:
    j = (i + 1) % L
    chars = ["I"] * L
    chars[i] = letter
    chars[j] = letter
    return "".join(chars)


def _ordering_violation_message(jx: float, jy: float, jz: float) -> str:
    mags = {"x": abs(jx), "y": abs(jy), "z": abs(jz)}
    by_size = sorted(mags, key=mags.get, reverse=True)
    relabel = ", ".join(f"{new}->{old}" for new, old in zip("zxy", by_size))
    return (
        f"couplings must satisfy |J^z| >= |J^x| >= |J^y| "
        f"(got |J^x|={abs(jx)}, |J^y|={abs(jy)}, |J^z|={abs(jz)}); "
        f"relabeling the axes ({relabel}) restores the convention"
    )


def build_xyz(L: int, jx: float, jy: float, jz: float) -> HamiltonianSpec:
    """Nearest-neighbour XYZ ring ``-sum_i (J^x XX + J^y YY + J^z ZZ)``."""
    if L < 4 or L % 2:
        raise ConfigError(f"the XYZ ring is built for even L >= 4, got L={L}")
    if not (abs(jz) >= abs(jx) >= abs(jy)):
        raise ConfigError(_ordering_violation_message(jx, jy, jz))
    terms: list[PauliTerm] = []
    for letter, coupling in (("X", jx), ("Y", jy), ("Z", jz)):
        for i in range(L):
            terms.append(PauliTerm(-coupling, _ring_string(L, letter, i)))
    return HamiltonianSpec(L, tuple(terms), couplings=(jx, jy, jz))


def build_h0_bsap(L: int, jz: float) -> HamiltonianSpec:
    """Ising-ring starting Hamiltonian ``-J^z sum_i Z_i Z_{i+1}``."""
    if L < 4 or L % 2:
        raise ConfigError(f"the Ising-ring start is built for even L >= 4, got L={L}")
    return HamiltonianSpec(
        L,
        tuple(PauliTerm(-jz, _ring_string(L, "Z", i)) for i in range(L)),
        couplings=(0.0, 0.0, jz),
    )


def build_h0_ap(L: int, jz: float) -> HamiltonianSpec:
    """Non-degenerate field starting point ``-J^z sum_i Z_i / 2^i``."""
    if L < 2 or L % 2:
        raise ConfigError(f"the field start is built for even L >= 2, got L={L}")
    terms = []
    for i in range(L):
        chars = ["I"] * L
        chars[i] = "Z"
        terms.append(PauliTerm(-jz / (2**i), "".join(chars)))
    return HamiltonianSpec(L, tuple(terms))


# --- interpolation schedules -------------------------------------------------

def _linear(s: float) -> float:
    return s


def _smoothstep(s: float) -> float:
    return s * s * (3.0 - 2.0 * s)


def _sin2(s: float) -> float:
    return math.sin(0.5 * math.pi * s) ** 2


SCHEDULES: dict[str, Callable[[float], float]] = {
    "linear": _linear,
    "smoothstep": _smoothstep,
    "sin2": _sin2,
}


def resolve_schedule(schedule: str | Callable[[float], float]) -> Callable[[float], float]:
    if callable(schedule):
        f = schedule
    else:
        try:
            f = SCHEDULES[schedule]
        except KeyError:
            raise ConfigError(
                f"unknown schedule {schedule!r}; choose from {sorted(SCHEDULES)}"
            ) from None
    if abs(f(0.0)) > 1e-15 or abs(f(1.0) - 1.0) > 1e-15:
        raise ConfigError("schedule must satisfy f(0)=0 and f(1)=1")
    return f


def interpolate(
    h0: HamiltonianSpec,
    ht: HamiltonianSpec,
    s: float,
    schedule: str | Callable[[float], float] = "linear",
) -> HamiltonianSpec:
    """``H(s) = H_0 + f(s) * (H_T - H_0)`` with exact endpoints.

    Terms sharing a letter string are merged; exactly-zero coefficients are
    dropped, so ``s=0`` returns the terms of ``h0`` and ``s=1`` those of
    ``ht`` without roundoff residue.
    """
    if h0.num_qubits != ht.num_qubits:
        raise ValueError("endpoint Hamiltonians act on different qubit counts")
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"s must lie in [0, 1], got {s}")
    g = resolve_schedule(schedule)(s)
    merged: dict[str, float] = {}
    for t in h0.terms:
        merged[t.letters] = merged.get(t.letters, 0.0) + (1.0 - g) * t.coefficient
    for t in ht.terms:
        merged[t.letters] = merged.get(t.letters, 0.0) + g * t.coefficient
    terms = tuple(PauliTerm(c, s_) for s_, c in merged.items() if c != 0.0)
    return HamiltonianSpec(h0.num_qubits, terms)


# --- bit-encoded application --------------------------------------------------

def encode_terms(spec: HamiltonianSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Bit-encode terms for the kernels: (flip masks, sign masks, weights).

    ``P|b> = w * (-1)^popcount(b & sign_mask) * |b ^ flip>`` with
    ``w = coefficient * i^{#Y}``.
    """
    nt = len(spec.terms)
    flips = np.zeros(nt, dtype=np.int64)
    signs = np.zeros(nt, dtype=np.int64)
    weights = np.zeros(nt, dtype=np.complex128)
    for t_i, term in enumerate(spec.terms):
        n_y = 0
        for q, letter in enumerate(term.letters):
            if letter in "XY":
                flips[t_i] |= 1 << q
            if letter in "ZY":
                signs[t_i] |= 1 << q
            if letter == "Y":
                n_y += 1
        weights[t_i] = term.coefficient * (1j**n_y)
    return flips, signs, weights


def apply_hamiltonian(h: HamiltonianSpec, state: StateVector) -> StateVector:
    """``H |psi>`` (not normalized)."""
    if h.num_qubits != state.num_qubits:
        raise ValueError("Hamiltonian and state qubit counts differ")
    flips, signs, weights = encode_terms(h)
    return StateVector(
        state.num_qubits, kernels.apply_pauli_sum(state.amplitudes, flips, signs, weights)
    )


def expectation(state: StateVector, h: HamiltonianSpec) -> float:
    """``<psi|H|psi>`` (real for the Hermitian sums built here)."""
    h_psi = apply_hamiltonian(h, state)
    return float(np.real(np.vdot(state.amplitudes, h_psi.amplitudes)))


def matrix_element(bra: StateVector, h: HamiltonianSpec, ket: StateVector) -> complex:
    """``<bra|H|ket>``."""
    h_ket = apply_hamiltonian(h, ket)
    return complex(np.vdot(bra.amplitudes, h_ket.amplitudes))


# --- dense oracle and clustering ----------------------------------------------

def is_real_valued(spec: HamiltonianSpec) -> bool:
    """True when every term carries an even number of Y letters."""
    return all(t.letters.count("Y") % 2 == 0 for t in spec.terms)


def dense_matrix(spec: HamiltonianSpec) -> np.ndarray:
    """Kronecker-built dense matrix (float64 when the sum is real-valued)."""
    L = spec.num_qubits
    if L > DENSE_QUBIT_LIMIT:
        raise ResourceLimitError(
            f"dense matrices are limited to {DENSE_QUBIT_LIMIT} qubits, got L={L}"
        )
    real = is_real_valued(spec)
    dtype = np.float64 if real else np.complex128
    dim = 1 << L
    out = np.zeros((dim, dim), dtype=dtype)
    for term in spec.terms:
        n_y = term.letters.count("Y")
        acc = np.eye(1, dtype=dtype)
        for q in range(L):
            factor = _PAULI_REAL[term.letters[q]].astype(dtype)
            acc = np.kron(factor, acc)
        # _PAULI_REAL stores -iY, so restore i^{#Y}.
        scale = term.coefficient * (1j**n_y if not real else (-1.0 if n_y % 4 == 2 else 1.0))
        out += scale * acc
    return out


def _default_cluster_breaks(eigenvalues: np.ndarray) -> np.ndarray:
    gaps = np.diff(eigenvalues)
    scale = np.maximum(1.0, np.maximum(np.abs(eigenvalues[:-1]), np.abs(eigenvalues[1:])))
    return gaps > 1e-8 * scale


def cluster_eigenvalues(
    eigenvalues: np.ndarray, cluster_tolerance: float | None
) -> tuple[tuple[int, int], ...]:
    """Group ascending eigenvalues into near-degenerate runs.

    With ``cluster_tolerance=None`` a relative rule ``gap > 1e-8 * max(1, |λ|)``
    separates clusters; an explicit float is used as an absolute gap threshold.
    """
    n = len(eigenvalues)
    if n == 0:
        return ()
    if cluster_tolerance is None:
        breaks = _default_cluster_breaks(eigenvalues)
    else:
        breaks = np.diff(eigenvalues) > cluster_tolerance
    clusters = []
    lo = 0
    for i, brk in enumerate(breaks):
        if brk:
            clusters.append((lo, i + 1))
            lo = i + 1
    clusters.append((lo, n))
    return tuple(clusters)


def dense_eigensolve(
    spec: HamiltonianSpec, cluster_tolerance: float | None = None
) -> EigenSolution:
    """Full eigensolve of the dense matrix, with degeneracy clustering."""
    h = dense_matrix(spec)
    eigenvalues, eigenvectors = np.linalg.eigh(h)
    clusters = cluster_eigenvalues(eigenvalues, cluster_tolerance)
    return EigenSolution(eigenvalues, eigenvectors, cluster_tolerance, clusters)
