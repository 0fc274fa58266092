"""Weight-preserving parametrized gates and circuit plans.

Conventions (fixed here once, pinned by matrix-level tests):

* ``R_y(t) = exp(-i t Y / 2)``, ``R_z(t) = exp(-i t Z / 2)``.
* CZ is the symmetric diagonal ``diag(1, 1, 1, -1)``.
* An *open* control fires when its qubit is ``|0>``; a closed control on ``|1>``.
* Two-qubit composites are written on target pair ``(i, j)`` with qubit ``i``
  the local least-significant bit, matching ``apply_gate`` target order.

The composite rotations:

* ``gy2(i, j, a)``: ``(H x H) CZ (Ry(-a)_i x Ry(a)_j) CZ (H x H)`` — a real
  Givens rotation in span{|0_i 1_j>, |1_i 0_j>}, identity on |00> and |11>.
* ``gx2(i, j, a)``: the same core conjugated by ``Rz^{-1}(pi/4)_i x Rz(pi/4)_j``
  before and ``Rz(pi/4)_i x Rz^{-1}(pi/4)_j`` after.
* ``gz2(i, j, a)``: ``Rz(-a)_i x Rz(a)_j`` (diagonal relative phases).
* ``gy4/gx4 (i, j)(k, r)``: a CNOT sandwich — open-controlled CNOTs
  (control j -> target i, control k -> target r), a doubly-controlled inner
  two-qubit rotation on (j, k) with closed controls on i and r, then the
  un-computing CNOT pair.  Rotates the weight-2 state with 1s at {i,j}
  against the one with 1s at {k,r} and fixes every other weight-2 state.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Iterable

import numpy as np

from .statevector import GateMatrix, StateVector, apply_gate, basis_state, bits_to_index

_H1 = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)
_CZ = np.diag([1.0, 1.0, 1.0, -1.0]).astype(np.complex128)


def _ry(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


def _rz(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def _kron2(op_j: np.ndarray, op_i: np.ndarray) -> np.ndarray:
    """Two-qubit matrix in the (i, j) target order (i = local LSB)."""
    return np.kron(op_j, op_i)


def gy2_matrix(alpha: float) -> GateMatrix:
    hh = _kron2(_H1, _H1)
    rot = _kron2(_ry(alpha), _ry(-alpha))
    return GateMatrix(2, hh @ _CZ @ rot @ _CZ @ hh)


def gx2_matrix(alpha: float) -> GateMatrix:
    pre = _kron2(_rz(math.pi / 4.0), _rz(-math.pi / 4.0))
    post = _kron2(_rz(-math.pi / 4.0), _rz(math.pi / 4.0))
    return GateMatrix(2, post @ gy2_matrix(alpha).entries @ pre)


def gz2_matrix(alpha: float) -> GateMatrix:
    return GateMatrix(2, _kron2(_rz(alpha), _rz(-alpha)))


def _controlled(
    num_qubits: int,
    inner: np.ndarray,
    inner_bits: tuple[int, ...],
    closed_controls: tuple[int, ...] = (),
    open_controls: tuple[int, ...] = (),
) -> np.ndarray:
    """Embed ``inner`` (acting on local bit positions ``inner_bits``) into a
    ``2^num_qubits`` matrix, active only where the control bits match."""
    dim = 1 << num_qubits
    out = np.eye(dim, dtype=np.complex128)
    k = len(inner_bits)
    for col in range(dim):
        if any(not (col >> c) & 1 for c in closed_controls):
            continue
        if any((col >> c) & 1 for c in open_controls):
            continue
        a_old = 0
        for p, b in enumerate(inner_bits):
            a_old |= ((col >> b) & 1) << p
        out[:, col] = 0.0
        for a_new in range(1 << k):
            row = col
            for p, b in enumerate(inner_bits):
                row &= ~(1 << b)
                row |= ((a_new >> p) & 1) << b
            out[row, col] = inner[a_new, a_old]
    return out


def _g4_matrix(inner_2q: np.ndarray) -> np.ndarray:
    """16x16 sandwich on local bits (0,1,2,3) = qubits (i,j,k,r)."""
    cnot_ji = _controlled(4, np.array([[0, 1], [1, 0]], dtype=np.complex128), (0,), open_controls=(1,))
    cnot_kr = _controlled(4, np.array([[0, 1], [1, 0]], dtype=np.complex128), (3,), open_controls=(2,))
    wrap = cnot_ji @ cnot_kr
    core = _controlled(4, inner_2q, (1, 2), closed_controls=(0, 3))
    return wrap @ core @ wrap


def gy4_matrix(alpha: float) -> GateMatrix:
    return GateMatrix(4, _g4_matrix(gy2_matrix(alpha).entries))


def gx4_matrix(alpha: float) -> GateMatrix:
    return GateMatrix(4, _g4_matrix(gx2_matrix(alpha).entries))


_X1 = GateMatrix(1, np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128))
_CNOT = GateMatrix(
    2,
    # target ordering (target, control): flips local bit 0 when bit 1 is set
    np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128
    ),
)

PARAMETRIZED_KINDS = {"GY2": 2, "GX2": 2, "GZ2": 2, "GY4": 4, "GX4": 4}

_MATRIX_BUILDERS = {
    "GY2": gy2_matrix,
    "GX2": gx2_matrix,
    "GZ2": gz2_matrix,
    "GY4": gy4_matrix,
    "GX4": gx4_matrix,
}


@dataclass(frozen=True)
class GateDescriptor:
    """One gate in a plan.

    ``kind`` is one of GY2/GX2/GZ2 (qubits (i,j)), GY4/GX4 (qubits (i,j,k,r)),
    CNOT (qubits (control, target)), XLAYER (X on every listed qubit), or
    FIXED (an explicit matrix on the listed qubits).  Parametrized kinds carry
    a ``param_slot`` into the plan's parameter vector.
    """

    kind: str
    qubits: tuple[int, ...]
    param_slot: int | None = None
    matrix: GateMatrix | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "qubits", tuple(self.qubits))
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"gate qubits must be distinct, got {self.qubits!r}")
        if self.kind in PARAMETRIZED_KINDS:
            if len(self.qubits) != PARAMETRIZED_KINDS[self.kind]:
                raise ValueError(f"{self.kind} acts on {PARAMETRIZED_KINDS[self.kind]} qubits")
            if self.param_slot is None:
                raise ValueError(f"{self.kind} requires a parameter slot")
            if self.kind in ("GY4", "GX4"):
                i, j, k, r = self.qubits
                if not (i < j and k < r):
                    raise ValueError("four-qubit rotations require i<j and k<r")
        elif self.kind == "CNOT":
            if len(self.qubits) != 2 or self.param_slot is not None:
                raise ValueError("CNOT takes (control, target) and no parameter")
        elif self.kind == "XLAYER":
            if not self.qubits or self.param_slot is not None:
                raise ValueError("XLAYER lists at least one qubit and no parameter")
        elif self.kind == "FIXED":
            if self.matrix is None or len(self.qubits) != self.matrix.arity:
                raise ValueError("FIXED requires a matrix matching its qubits")
            if self.param_slot is not None:
                raise ValueError("FIXED gates are not parametrized")
        else:
            raise ValueError(f"unknown gate kind {self.kind!r}")


@dataclass(frozen=True)
class CircuitPlan:
    """Immutable ordered gate list with a parameter count and the binary
    component flag (a fixed sign flip on the reference member when set)."""

    num_qubits: int
    gates: tuple[GateDescriptor, ...]
    num_params: int
    component_bit: int = 0
    mode: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.component_bit not in (0, 1):
            raise ValueError("component_bit must be 0 or 1")
        seen: set[int] = set()
        for g in self.gates:
            for q in g.qubits:
                if not 0 <= q < self.num_qubits:
                    raise ValueError(f"gate qubit {q} out of range for L={self.num_qubits}")
            if g.param_slot is not None:
                if not 0 <= g.param_slot < self.num_params:
                    raise ValueError(f"param slot {g.param_slot} out of range")
                if g.param_slot in seen:
                    raise ValueError(f"param slot {g.param_slot} used twice")
                seen.add(g.param_slot)

    def with_component_bit(self, bit: int) -> "CircuitPlan":
        return replace(self, component_bit=bit)


def apply_descriptor(
    state: StateVector, desc: GateDescriptor, params: np.ndarray
) -> StateVector:
    if desc.kind in _MATRIX_BUILDERS:
        gate = _MATRIX_BUILDERS[desc.kind](float(params[desc.param_slot]))
        return apply_gate(state, gate, desc.qubits)
    if desc.kind == "CNOT":
        ctrl, tgt = desc.qubits
        return apply_gate(state, _CNOT, (tgt, ctrl))
    if desc.kind == "XLAYER":
        for q in desc.qubits:
            state = apply_gate(state, _X1, (q,))
        return state
    if desc.kind == "FIXED":
        return apply_gate(state, desc.matrix, desc.qubits)
    raise ValueError(f"unknown gate kind {desc.kind!r}")


def apply_plan(state: StateVector, plan: CircuitPlan, params: Iterable[float] = ()) -> StateVector:
    params = np.asarray(list(params), dtype=np.float64)
    if params.shape != (plan.num_params,):
        raise ValueError(
            f"plan expects {plan.num_params} parameters, got {params.shape[0]}"
        )
    for desc in plan.gates:
        state = apply_descriptor(state, desc, params)
    return state


def build_n1_plan(L: int, mode: str) -> CircuitPlan:
    """Gate plan exploring the weight-2 branch from reference 1s at sites 0, 1.

    ``full-unitary`` emits every generator once — the two-site Y- and X-type
    rotations against sites 0 and 1, the pair rotations (0,1)<->(a,b), and one
    relative-phase gate — totalling L^2 - L - 1 parametrized gates.
    ``orthogonal`` keeps only the Y-type subset: d1 - 1 = L(L-1)/2 - 1 angles
    plus the plan's binary component flag.

    Gates are listed in application order: the phase gate and pair rotations
    come first, and the (0,a) / (1,a) rotations that move the reference member
    directly come last.  Only this ordering makes the truncated generator set
    reach every direction in the block (each generator appears once, so the
    factors nearest the output must be the ones that displace the reference);
    the mirrored ordering measurably fails to cover the sphere.
    """
    if L < 4 or L % 2:
        raise ValueError(f"the weight-2 plan needs even L >= 4, got L={L}")
    if mode not in ("full-unitary", "orthogonal"):
        raise ValueError(f"mode must be 'full-unitary' or 'orthogonal', got {mode!r}")
    gates: list[GateDescriptor] = []
    slot = 0

    def emit(kind: str, qubits: tuple[int, ...]) -> None:
        nonlocal slot
        gates.append(GateDescriptor(kind, qubits, param_slot=slot))
        slot += 1

    pairs = [(a, b) for a in range(2, L) for b in range(a + 1, L)]
    if mode == "full-unitary":
        emit("GZ2", (1, 2))
        for a, b in reversed(pairs):
            emit("GX4", (0, 1, a, b))
    for a, b in reversed(pairs):
        emit("GY4", (0, 1, a, b))
    if mode == "full-unitary":
        for a in range(L - 1, 1, -1):
            emit("GX2", (1, a))
    for a in range(L - 1, 1, -1):
        emit("GY2", (1, a))
    if mode == "full-unitary":
        for a in range(L - 1, 1, -1):
            emit("GX2", (0, a))
    for a in range(L - 1, 1, -1):
        emit("GY2", (0, a))
    return CircuitPlan(L, tuple(gates), num_params=slot, mode=mode)


def reference_n1(L: int) -> tuple[int, ...]:
    """The weight-2 reference member: 1s at sites 0 and 1."""
    return tuple(1 if q < 2 else 0 for q in range(L))


def explore_state(
    plan: CircuitPlan, params: Iterable[float], reference: tuple[int, ...]
) -> StateVector:
    """Apply the plan to ``|reference>`` (with the component sign flip first
    when the plan's bit is set) and verify the Hamming-weight block is kept."""
    ref_idx = bits_to_index(reference)
    state = basis_state(plan.num_qubits, ref_idx)
    if plan.component_bit:
        amps = state.amplitudes.copy()
        amps[ref_idx] = -amps[ref_idx]
        state = StateVector(plan.num_qubits, amps)
    state = apply_plan(state, plan, params)
    weight = sum(reference)
    idx = np.arange(state.dim, dtype=np.int64)
    outside = np.bitwise_count(idx) != weight
    leakage = float(np.sum(np.abs(state.amplitudes[outside]) ** 2))
    if leakage >= 1e-10:
        raise RuntimeError(f"plan leaked {leakage:.3e} probability out of the weight block")
    return state


# --- JSON serialization --------------------------------------------------------

def plan_to_dict(plan: CircuitPlan) -> dict:
    if any(g.kind == "FIXED" for g in plan.gates):
        raise ValueError("plans containing FIXED matrices are not JSON-serializable")
    return {
        "num_qubits": plan.num_qubits,
        "num_params": plan.num_params,
        "component_bit": plan.component_bit,
        "mode": plan.mode,
        "gates": [
            {"kind": g.kind, "qubits": list(g.qubits), "param_slot": g.param_slot}
            for g in plan.gates
        ],
    }


def plan_from_dict(data: dict) -> CircuitPlan:
    gates = tuple(
        GateDescriptor(g["kind"], tuple(g["qubits"]), g.get("param_slot"))
        for g in data["gates"]
    )
    return CircuitPlan(
        num_qubits=data["num_qubits"],
        gates=gates,
        num_params=data["num_params"],
        component_bit=data.get("component_bit", 0),
        mode=data.get("mode"),
    )


def plan_to_json(plan: CircuitPlan) -> str:
    return json.dumps(plan_to_dict(plan), indent=2)
