"""Time-dependent evolution, preparation-error metrics, and spectral tracking.

The interpolation is ``H(s) = H_0 + f(s) (H_T - H_0)``; each of the N steps
uses the midpoint sample ``s_k = (k - 1/2)/N`` and advances the state by
``exp(-i dt H(s_k))``, either exactly (dense eigendecomposition) or by the
first-order splitting ``exp(-i dt H_ZZ) exp(-i dt H_XX(s)) exp(-i dt H_YY(s))``
— rightmost factor applied first, each layer a product of commuting two-qubit
Pauli-rotation exponentials (even-index bonds before odd-index bonds).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import kernels
from .errors import ConfigError, ResourceLimitError
from .hamiltonians import (
    EigenSolution,
    HamiltonianSpec,
    cluster_eigenvalues,
    dense_eigensolve,
    dense_matrix,
    interpolate,
    is_real_valued,
    resolve_schedule,
)
from .statevector import StateVector

EXACT_MODE_QUBIT_LIMIT = 10
SPECTRAL_FLOW_QUBIT_LIMIT = 10

_PAULI_XX = np.array(
    [[0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0], [1, 0, 0, 0]], dtype=np.complex128
)
_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]])
_PAULI_YY = np.kron(_Y, _Y)


@dataclass(frozen=True)
class Schedule:
    """Stepping policy: N steps of duration dt (units of 1/J^z)."""

    num_steps: int
    step_duration: float
    schedule_function: str | Callable[[float], float] = "linear"
    stepping_mode: str = "trotter"

    def __post_init__(self) -> None:
        if self.num_steps < 1:
            raise ConfigError(f"num_steps must be >= 1, got {self.num_steps}")
        if not (self.step_duration > 0 and math.isfinite(self.step_duration)):
            raise ConfigError(f"step_duration must be positive, got {self.step_duration}")
        if self.stepping_mode not in ("trotter", "exact"):
            raise ConfigError(
                f"stepping_mode must be 'trotter' or 'exact', got {self.stepping_mode!r}"
            )
        resolve_schedule(self.schedule_function)

    @property
    def total_time(self) -> float:
        return self.num_steps * self.step_duration


@dataclass(frozen=True)
class CrossingEvent:
    """An interior point where two adjacent eigenvalue tracks touch."""

    s: float
    pair_index: int
    gap: float


@dataclass(frozen=True)
class SpectralFlow:
    s_grid: np.ndarray
    eigenvalue_tracks: np.ndarray  # (num_s, dim), ascending per row
    gaps: np.ndarray  # (num_s, dim-1) adjacent differences
    cluster_ids: np.ndarray  # (num_s, dim) degenerate-cluster labels
    crossings: tuple[CrossingEvent, ...]

    def cluster_sizes(self, s_index: int) -> tuple[int, ...]:
        ids = self.cluster_ids[s_index]
        return tuple(int(np.sum(ids == c)) for c in range(int(ids.max()) + 1))

    def partition_gap(self, lo: int, hi: int) -> np.ndarray:
        """Per-s distance between the track window [lo, hi) and the rest."""
        tracks = self.eigenvalue_tracks
        below = tracks[:, lo] - tracks[:, lo - 1] if lo > 0 else np.full(len(self.s_grid), np.inf)
        above = tracks[:, hi] - tracks[:, hi - 1] if hi < tracks.shape[1] else np.full(len(self.s_grid), np.inf)
        return np.minimum(below, above)


# --- layer splitting for the trotter mode --------------------------------------

def _merge_coefficients(
    h0: HamiltonianSpec, ht: HamiltonianSpec
) -> dict[str, tuple[float, float]]:
    merged: dict[str, tuple[float, float]] = {}
    for t in h0.terms:
        c0, ct = merged.get(t.letters, (0.0, 0.0))
        merged[t.letters] = (c0 + t.coefficient, ct)
    for t in ht.terms:
        c0, ct = merged.get(t.letters, (0.0, 0.0))
        merged[t.letters] = (c0, ct + t.coefficient)
    return merged


def _bond_sort_key(L: int, qubits: tuple[int, int]) -> tuple[int, int]:
    a, b = sorted(qubits)
    if b == a + 1:
        bond = a
    elif (a, b) == (0, L - 1):
        bond = L - 1
    else:
        bond = a  # non-ring pair: fall back to the lower site
    return (bond % 2, bond)


class _TrotterLayers:
    """Precomputed layer structure shared by all steps of one evolution."""

    def __init__(self, h0: HamiltonianSpec, ht: HamiltonianSpec) -> None:
        L = h0.num_qubits
        dim = 1 << L
        diag_masks: list[int] = []
        diag_coeffs: list[tuple[float, float]] = []
        xx: list[tuple[tuple[int, int], float, float]] = []
        yy: list[tuple[tuple[int, int], float, float]] = []
        for letters, (c0, ct) in _merge_coefficients(h0, ht).items():
            support = {c for c in letters if c != "I"}
            if support <= {"Z"}:
                mask = 0
                for q, c in enumerate(letters):
                    if c == "Z":
                        mask |= 1 << q
                diag_masks.append(mask)
                diag_coeffs.append((c0, ct))
            elif support == {"X"} and letters.count("X") == 2:
                pair = tuple(q for q, c in enumerate(letters) if c == "X")
                xx.append((pair, c0, ct))
            elif support == {"Y"} and letters.count("Y") == 2:
                pair = tuple(q for q, c in enumerate(letters) if c == "Y")
                yy.append((pair, c0, ct))
            else:
                raise ConfigError(
                    "trotter stepping supports Z/ZZ-diagonal, XX, and YY terms only; "
                    f"got a term with letters {letters!r}"
                )
        xx.sort(key=lambda item: _bond_sort_key(L, item[0]))
        yy.sort(key=lambda item: _bond_sort_key(L, item[0]))
        self.xx = xx
        self.yy = yy
        self.diag_coeffs = np.array(diag_coeffs, dtype=np.float64).reshape(-1, 2)
        idx = np.arange(dim, dtype=np.int64)
        rows = [
            1.0 - 2.0 * (np.bitwise_count(idx & mask) & 1).astype(np.float64)
            for mask in diag_masks
        ]
        self.diag_signs = np.array(rows, dtype=np.float64).reshape(len(rows), dim)

    def step(self, amps: np.ndarray, g: float, dt: float, num_qubits: int) -> np.ndarray:
        for pair, c0, ct in self.yy:
            theta = dt * ((1.0 - g) * c0 + g * ct)
            mat = math.cos(theta) * np.eye(4) - 1j * math.sin(theta) * _PAULI_YY
            amps = kernels.apply_matrix(amps, mat, pair, num_qubits)
        for pair, c0, ct in self.xx:
            theta = dt * ((1.0 - g) * c0 + g * ct)
            mat = math.cos(theta) * np.eye(4) - 1j * math.sin(theta) * _PAULI_XX
            amps = kernels.apply_matrix(amps, mat, pair, num_qubits)
        if len(self.diag_coeffs):
            coeffs = (1.0 - g) * self.diag_coeffs[:, 0] + g * self.diag_coeffs[:, 1]
            diag = coeffs @ self.diag_signs
            amps = kernels.apply_diag_phase(amps, np.exp(-1j * dt * diag))
        return amps


def evolve(
    state: StateVector, h0: HamiltonianSpec, ht: HamiltonianSpec, sched: Schedule
) -> StateVector:
    """Drive ``state`` through the interpolation with the given stepping."""
    if not (state.num_qubits == h0.num_qubits == ht.num_qubits):
        raise ValueError("state and Hamiltonians disagree on qubit count")
    f = resolve_schedule(sched.schedule_function)
    n, dt = sched.num_steps, sched.step_duration
    amps = state.amplitudes.copy()
    if sched.stepping_mode == "trotter":
        layers = _TrotterLayers(h0, ht)
        for k in range(1, n + 1):
            g = f((k - 0.5) / n)
            amps = layers.step(amps, g, dt, state.num_qubits)
    else:
        if state.num_qubits > EXACT_MODE_QUBIT_LIMIT:
            raise ResourceLimitError(
                f"exact stepping is limited to {EXACT_MODE_QUBIT_LIMIT} qubits"
            )
        for k in range(1, n + 1):
            h_s = interpolate(h0, ht, (k - 0.5) / n, f)
            dense = dense_matrix(h_s)
            if is_real_valued(h_s):
                w, v = np.linalg.eigh(dense)
                amps = v @ (np.exp(-1j * dt * w) * (v.T @ amps))
            else:
                w, v = np.linalg.eigh(dense)
                amps = v @ (np.exp(-1j * dt * w) * (v.conj().T @ amps))
    return StateVector(state.num_qubits, amps)


def preparation_error(
    prepared: StateVector,
    ht: HamiltonianSpec,
    level_index: int,
    cluster_tolerance: float | None = None,
    solution: EigenSolution | None = None,
) -> float:
    """Weight of ``prepared`` outside the level's degenerate cluster.

    ``level_index`` counts clusters of the dense spectrum ascending.  Pass a
    precomputed ``solution`` to amortize the eigensolve across many calls.
    """
    if solution is None:
        solution = dense_eigensolve(ht, cluster_tolerance)
    if not 0 <= level_index < solution.num_clusters:
        raise ValueError(
            f"level index {level_index} out of range ({solution.num_clusters} clusters)"
        )
    coeffs = solution.cluster_projector_coefficients(level_index, prepared.amplitudes)
    total = float(np.real(np.vdot(prepared.amplitudes, prepared.amplitudes)))
    inside = float(np.real(np.vdot(coeffs, coeffs)))
    return math.sqrt(max(0.0, total - inside))


def ap_subspace_error(
    h0: HamiltonianSpec,
    ht: HamiltonianSpec,
    sched: Schedule,
    partition: int,
    initial: StateVector,
    cluster_tolerance: float | None = None,
) -> float:
    """Leakage of an evolved cluster member out of its tracked subspace.

    ``partition`` selects a degenerate cluster of H(0); its eigenvalue
    positions [lo, hi) track to the same positions of the ascending H(1)
    spectrum (valid while the window's boundary gaps stay open, which is the
    regime this metric is designed for).  The initial state is projected into
    the s=0 cluster, evolved, and compared against the s=1 window projector.
    """
    sol0 = dense_eigensolve(h0, cluster_tolerance)
    if not 0 <= partition < sol0.num_clusters:
        raise ValueError(
            f"partition {partition} out of range ({sol0.num_clusters} clusters at s=0)"
        )
    lo, hi = sol0.clusters[partition]
    block0 = sol0.eigenvectors[:, lo:hi]
    coeffs0 = block0.conj().T @ initial.amplitudes
    projected = block0 @ coeffs0
    norm = float(np.linalg.norm(projected))
    if norm < 1e-12:
        raise ValueError("initial state has no weight in the chosen cluster")
    start = StateVector(initial.num_qubits, projected / norm)
    evolved = evolve(start, h0, ht, sched)
    sol1 = dense_eigensolve(ht, cluster_tolerance)
    block1 = sol1.eigenvectors[:, lo:hi]
    inside = block1.conj().T @ evolved.amplitudes
    return math.sqrt(max(0.0, 1.0 - float(np.real(np.vdot(inside, inside)))))


# --- spectral flow --------------------------------------------------------------

def _eigenvalues_at(
    h0: HamiltonianSpec, ht: HamiltonianSpec, f: Callable[[float], float], s: float
) -> np.ndarray:
    return np.linalg.eigvalsh(dense_matrix(interpolate(h0, ht, s, f)))


def _golden_minimize(fn: Callable[[float], float], a: float, b: float, iters: int = 80) -> tuple[float, float]:
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(iters):
        if b - a < 1e-12:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = fn(d)
    return (c, fc) if fc < fd else (d, fd)


def spectral_flow(
    h0: HamiltonianSpec,
    ht: HamiltonianSpec,
    f: str | Callable[[float], float] = "linear",
    s_points: int | np.ndarray = 41,
    cluster_tolerance: float | None = None,
    crossing_tolerance: float | None = None,
    refine: bool = True,
) -> SpectralFlow:
    """Track the dense spectrum of H(s) and flag interior track touchings.

    A pair of adjacent tracks is flagged as a crossing when a refined interior
    gap minimum falls below the crossing tolerance while the pair is clearly
    separated elsewhere — persistent degeneracies (clusters that never split)
    are not crossings, and neither are endpoint degeneracies that only split.
    """
    if h0.num_qubits > SPECTRAL_FLOW_QUBIT_LIMIT:
        raise ResourceLimitError(
            f"spectral flow is limited to {SPECTRAL_FLOW_QUBIT_LIMIT} qubits"
        )
    sched_f = resolve_schedule(f)
    if isinstance(s_points, int):
        if s_points < 2:
            raise ValueError("the s grid needs at least two points")
        s_grid = np.linspace(0.0, 1.0, s_points)
    else:
        s_grid = np.asarray(s_points, dtype=np.float64)
        if s_grid.size == 0:
            raise ValueError("the s grid is empty")
        if np.any(s_grid < 0.0) or np.any(s_grid > 1.0) or np.any(np.diff(s_grid) <= 0):
            raise ValueError("the s grid must be strictly increasing within [0, 1]")
    tracks = np.array([_eigenvalues_at(h0, ht, sched_f, s) for s in s_grid])
    gaps = np.diff(tracks, axis=1)
    cluster_ids = np.zeros(tracks.shape, dtype=np.int64)
    for k in range(tracks.shape[0]):
        for cid, (lo, hi) in enumerate(cluster_eigenvalues(tracks[k], cluster_tolerance)):
            cluster_ids[k, lo:hi] = cid

    scale = max(1.0, float(np.max(np.abs(tracks[0]))), float(np.max(np.abs(tracks[-1]))))
    ctol = crossing_tolerance if crossing_tolerance is not None else 1e-6 * scale
    crossings: list[CrossingEvent] = []
    num_s = len(s_grid)
    seen: set[tuple[int, float]] = set()
    for pair in range(tracks.shape[1] - 1):
        series = gaps[:, pair]
        if float(np.max(series)) <= 10.0 * ctol:
            continue  # the pair never separates: a persistent cluster, not a crossing
        for k in range(1, num_s - 1):
            if not (series[k] <= series[k - 1] and series[k] <= series[k + 1]):
                continue
            sharp_dip = series[k] < 0.5 * min(series[k - 1], series[k + 1])
            if refine and (sharp_dip or series[k] < 100.0 * ctol):
                def pair_gap(s: float, p: int = pair) -> float:
                    return float(np.diff(_eigenvalues_at(h0, ht, sched_f, s))[p])

                s_star, g_star = _golden_minimize(
                    pair_gap, float(s_grid[k - 1]), float(s_grid[k + 1])
                )
            else:
                s_star, g_star = float(s_grid[k]), float(series[k])
            key = (pair, round(s_star, 8))
            if g_star < ctol and 0.0 < s_star < 1.0 and key not in seen:
                seen.add(key)
                crossings.append(CrossingEvent(s_star, pair, g_star))
    return SpectralFlow(
        s_grid=s_grid,
        eigenvalue_tracks=tracks,
        gaps=gaps,
        cluster_ids=cluster_ids,
        crossings=tuple(crossings),
    )
