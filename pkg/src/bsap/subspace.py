"""Domain-wall bitstring machinery.

The bond-difference map ``phi`` sends a site configuration to the string of
nearest-neighbour XORs on the ring; it is exactly 2-to-1 (a configuration and
its global spin flip share an image).  The two inverses pick the preimage
with bit 0 clear (``phi_inverse_0``) or set (``phi_inverse_1``).  Levels of
the Ising-ring starting Hamiltonian correspond to even Hamming weights of the
image string: weight ``2n`` <-> energy ``-J^z (L - 4n)``.

Bitstrings are site-indexed tuples: ``bits[j]`` is site ``j``, and the flat
statevector index packs site ``j`` into bit ``j``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb

import numpy as np

from .gates import CircuitPlan, GateDescriptor
from .statevector import StateVector, bits_to_index

Bitstring = tuple[int, ...]


def _check_bits(b: Bitstring) -> None:
    if not b or any(x not in (0, 1) for x in b):
        raise ValueError(f"bitstring must be a nonempty 0/1 tuple, got {b!r}")


def hamming_weight(b: Bitstring) -> int:
    _check_bits(b)
    return sum(b)


def phi(b: Bitstring) -> Bitstring:
    """Bond map: output bit j = b_j XOR b_{j+1 mod L}."""
    _check_bits(b)
    L = len(b)
    return tuple(b[j] ^ b[(j + 1) % L] for j in range(L))


def phi_inverse_0(b: Bitstring) -> Bitstring:
    """Suffix-parity preimage (bit 0 clear): out_j = XOR of b_j..b_{L-1}."""
    _check_bits(b)
    if hamming_weight(b) % 2:
        raise ValueError("odd-weight strings are outside the image of phi")
    acc = 0
    out = [0] * len(b)
    for j in range(len(b) - 1, -1, -1):
        acc ^= b[j]
        out[j] = acc
    return tuple(out)


def phi_inverse_1(b: Bitstring) -> Bitstring:
    """The complementary preimage (bit 0 set): global flip of phi_inverse_0."""
    return tuple(1 - x for x in phi_inverse_0(b))


def phi_inverse_circuit(L: int, branch: int) -> CircuitPlan:
    """CNOT ladder realizing phi_inverse_branch on basis states.

    For j from L-2 down to 0: CNOT with control j+1 and target j; branch 1
    appends the global X layer.
    """
    if L < 2:
        raise ValueError("the ladder needs at least two sites")
    if branch not in (0, 1):
        raise ValueError(f"branch must be 0 or 1, got {branch!r}")
    gates = [GateDescriptor("CNOT", (j + 1, j)) for j in range(L - 2, -1, -1)]
    if branch == 1:
        gates.append(GateDescriptor("XLAYER", tuple(range(L))))
    return CircuitPlan(L, tuple(gates), num_params=0)


@dataclass(frozen=True)
class SubspaceBasis:
    """Ordered members of one branch of a Hamming-weight level.

    ``W`` lists the weight-2n image strings themselves; ``B0``/``B1`` list
    their preimages with bit 0 clear/set.  Members are sorted ascending by
    integer value, fixing the subspace-matrix indexing.
    """

    L: int
    level_n: int
    branch: str
    members: tuple[Bitstring, ...]

    @property
    def dimension(self) -> int:
        return len(self.members)


def branch_dimension(L: int, n: int) -> int:
    """C(L, 2n): the size of one branch of level n."""
    return comb(L, 2 * n)


def level_degeneracy(L: int, n: int) -> int:
    """2*C(L, 2n): both branches of level n."""
    return 2 * branch_dimension(L, n)


def enumerate_branch(L: int, n: int, branch: str) -> SubspaceBasis:
    if not 0 <= n <= L // 2:
        raise ValueError(f"level n must satisfy 0 <= n <= L/2, got n={n}")
    if branch not in ("W", "B0", "B1"):
        raise ValueError(f"branch must be one of 'W', 'B0', 'B1', got {branch!r}")
    images = []
    for ones in combinations(range(L), 2 * n):
        bits = [0] * L
        for q in ones:
            bits[q] = 1
        images.append(tuple(bits))
    images.sort(key=bits_to_index)
    if branch == "W":
        members = tuple(images)
    elif branch == "B0":
        members = tuple(sorted((phi_inverse_0(w) for w in images), key=bits_to_index))
    else:
        members = tuple(sorted((phi_inverse_1(w) for w in images), key=bits_to_index))
    return SubspaceBasis(L, n, branch, members)


def x_all(state: StateVector) -> StateVector:
    """Global spin flip: amplitude at index i moves to the complement index."""
    return StateVector(state.num_qubits, state.amplitudes[::-1].copy())


def parity_expectation(state: StateVector) -> float:
    """<psi| (tensor X) |psi> — real for any state."""
    return float(np.real(np.vdot(state.amplitudes, state.amplitudes[::-1])))


def apply_parity_sector(state: StateVector, sign: int) -> StateVector:
    """Project-and-normalize onto the global-spin-flip sector ``sign``.

    Exact unit norm requires the input to be supported on the bit-0-clear
    half (so that it is orthogonal to its global flip); a norm drift beyond
    1e-10 signals that precondition was violated.
    """
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign!r}")
    flipped = state.amplitudes[::-1]
    amps = (state.amplitudes + sign * flipped) / np.sqrt(2.0)
    norm = float(np.linalg.norm(amps))
    if abs(norm - 1.0) > 1e-10:
        raise ValueError(
            f"input is not supported on one branch (sector norm {norm:.12f})"
        )
    return StateVector(state.num_qubits, amps / norm)
