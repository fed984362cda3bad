"""Dense statevector simulation of parameterized circuits.

States are plain complex128 numpy vectors of length ``2**num_qubits``. Qubit 0
is the least-significant bit of the basis-state index. Rotation gates follow
``R_sigma(theta) = exp(-i theta sigma / 2)``.

The batched kernel (:func:`run_batch`) pushes the trial state and every
derivative state through the circuit together, which is what makes metric
assembly affordable for a few hundred parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence, Union

import numpy as np

ROTATIONS = ("RX", "RY", "RZ")
FIXED_1Q = ("H", "X", "Z")
TWO_QUBIT = ("CX", "CZ", "ControlledPhase")
GATE_KINDS = ROTATIONS + FIXED_1Q + TWO_QUBIT

_SQ2 = 1.0 / np.sqrt(2.0)
PAULI = {
    "RX": np.array([[0, 1], [1, 0]], dtype=complex),
    "RY": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "RZ": np.array([[1, 0], [0, -1]], dtype=complex),
}
FIXED_MATRICES = {
    "H": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def rotation_matrix(kind: str, theta: float) -> np.ndarray:
    """Return ``exp(-i theta sigma / 2)`` for ``kind`` in RX/RY/RZ."""
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    if kind == "RX":
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)
    if kind == "RY":
        return np.array([[c, -s], [s, c]], dtype=complex)
    if kind == "RZ":
        return np.array([[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]], dtype=complex)
    raise ValueError(f"not a rotation gate: {kind}")


@dataclass(frozen=True)
class Gate:
    kind: str
    targets: tuple[int, ...]
    angle: float | None = None
    param: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        width = 2 if self.kind in TWO_QUBIT else 1
        if len(self.targets) != width:
            raise ValueError(f"{self.kind} acts on {width} qubit(s), got {self.targets}")
        if width == 2 and self.targets[0] == self.targets[1]:
            raise ValueError(f"{self.kind} control and target coincide")
        angled = self.kind in ROTATIONS or self.kind == "ControlledPhase"
        if not angled and (self.angle is not None or self.param is not None):
            raise ValueError(f"{self.kind} takes no angle")

    @property
    def is_parameterized(self) -> bool:
        return self.param is not None

    def resolve_angle(self, angle_values: Sequence[float] | np.ndarray | None) -> float:
        if self.param is not None:
            if angle_values is None or self.param >= len(angle_values):
                raise ValueError(f"missing angle for parameter slot {self.param}")
            return float(angle_values[self.param])
        return 0.0 if self.angle is None else float(self.angle)

    def matrix(self, angle_values=None) -> np.ndarray:
        """Dense matrix on the gate's own qubits (first target = low bit for 2q gates)."""
        if self.kind in ROTATIONS:
            return rotation_matrix(self.kind, self.resolve_angle(angle_values))
        if self.kind in FIXED_MATRICES:
            return FIXED_MATRICES[self.kind].copy()
        # two-qubit, basis |t1 t0> with t0 = first target (control)
        if self.kind == "CZ":
            return np.diag([1, 1, 1, -1]).astype(complex)
        if self.kind == "ControlledPhase":
            return np.diag([1, 1, 1, np.exp(1j * self.resolve_angle(angle_values))])
        m = np.zeros((4, 4), dtype=complex)
        for i in range(4):
            c, t = i & 1, (i >> 1) & 1
            m[(c | ((t ^ c) << 1)), i] = 1.0
        return m


@dataclass(frozen=True)
class RegisterUnitary:
    """Dense unitary acting on qubits ``start .. start + width - 1``."""

    matrix: np.ndarray
    start: int = 0
    label: str = ""

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("register unitary must be a square matrix")
        dim = m.shape[0]
        if dim < 2 or dim & (dim - 1):
            raise ValueError(f"register unitary dimension {dim} is not a power of two")
        if np.max(np.abs(m.conj().T @ m - np.eye(dim))) > 1e-10:
            raise ValueError("register matrix is not unitary")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @property
    def width(self) -> int:
        return self.dimension.bit_length() - 1

    @property
    def target_register(self) -> range:
        return range(self.start, self.start + self.width)

    def dagger(self) -> "RegisterUnitary":
        return RegisterUnitary(self.matrix.conj().T, self.start, self.label + "^dag")


Op = Union[Gate, RegisterUnitary]


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    gates: tuple[Op, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.num_qubits < 1:
            raise ValueError("circuit needs at least one qubit")
        slots = []
        for op in self.gates:
            if isinstance(op, RegisterUnitary):
                if op.start < 0 or op.start + op.width > self.num_qubits:
                    raise ValueError("register unitary outside the circuit")
                continue
            if max(op.targets) >= self.num_qubits or min(op.targets) < 0:
                raise ValueError(f"gate {op.kind} targets {op.targets} out of range")
            if op.param is not None:
                slots.append(op.param)
        if sorted(slots) != list(range(len(slots))):
            raise ValueError("parameter slots must be 0..num_params-1, each used once")
        object.__setattr__(self, "_slot_order", tuple(slots))

    @property
    def num_params(self) -> int:
        return len(self._slot_order)

    @property
    def slot_order(self) -> tuple[int, ...]:
        """Parameter slots in the order their gates appear."""
        return self._slot_order

    def gate_for_param(self, k: int) -> Gate:
        for op in self.gates:
            if isinstance(op, Gate) and op.param == k:
                return op
        raise IndexError(f"no gate carries parameter {k}")

    def then(self, *ops: Op) -> "Circuit":
        return Circuit(self.num_qubits, self.gates + tuple(ops))


# --- states -----------------------------------------------------------------


def zero_state(num_qubits: int) -> np.ndarray:
    psi = np.zeros(2**num_qubits, dtype=complex)
    psi[0] = 1.0
    return psi


def basis_state(num_qubits: int, index: int) -> np.ndarray:
    psi = np.zeros(2**num_qubits, dtype=complex)
    psi[index] = 1.0
    return psi


def num_qubits_of(state: np.ndarray) -> int:
    n = len(state).bit_length() - 1
    if n < 1 or len(state) != 2**n:
        raise ValueError(f"state length {len(state)} is not a power of two >= 2")
    return n


def inner_product(a: np.ndarray, b: np.ndarray) -> complex:
    """``<a|b>``."""
    if a.shape != b.shape:
        raise ValueError(f"size mismatch: {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


# --- batched kernels ----------------------------------------------------------
# All kernels act on arrays of shape (batch, 2**n) and return new arrays.


@lru_cache(maxsize=None)
def _both_set(n: int, a: int, b: int) -> np.ndarray:
    i = np.arange(2**n)
    return np.flatnonzero(((i >> a) & 1) & ((i >> b) & 1))


@lru_cache(maxsize=None)
def _cx_perm(n: int, control: int, target: int) -> np.ndarray:
    i = np.arange(2**n)
    return i ^ (((i >> control) & 1) << target)


def _apply_1q(states: np.ndarray, n: int, q: int, mat: np.ndarray) -> np.ndarray:
    """Apply a 2x2 matrix, or one 2x2 matrix per batch row, to qubit ``q``."""
    b = states.shape[0]
    v = states.reshape(b, 2 ** (n - 1 - q), 2, 2**q)
    a0, a1 = v[:, :, 0, :], v[:, :, 1, :]
    if mat.ndim == 3:
        m = mat[:, :, :, None, None]
        m00, m01, m10, m11 = m[:, 0, 0], m[:, 0, 1], m[:, 1, 0], m[:, 1, 1]
    else:
        m00, m01, m10, m11 = mat[0, 0], mat[0, 1], mat[1, 0], mat[1, 1]
    out = np.empty_like(v)
    if mat.ndim == 2 and m01 == 0 and m10 == 0:
        np.multiply(a0, m00, out=out[:, :, 0, :])
        np.multiply(a1, m11, out=out[:, :, 1, :])
    else:
        out[:, :, 0, :] = m00 * a0 + m01 * a1
        out[:, :, 1, :] = m10 * a0 + m11 * a1
    return out.reshape(b, -1)


def _apply_block(states: np.ndarray, n: int, block: RegisterUnitary) -> np.ndarray:
    b = states.shape[0]
    w, s = block.width, block.start
    if s + w > n:
        raise ValueError("register unitary does not fit the state")
    return _apply_dense(states, n, block.matrix, s, w)


def _apply_dense(states: np.ndarray, n: int, mat: np.ndarray, s: int, w: int) -> np.ndarray:
    b = states.shape[0]
    if s == 0:
        # one GEMM over all rows
        return (states.reshape(-1, 2**w) @ mat.T).reshape(b, -1)
    v = states.reshape(b, 2 ** (n - s - w), 2**w, 2**s)
    return np.matmul(mat, v).reshape(b, -1)


def _apply_op(states: np.ndarray, n: int, op: Op, angle_values=None) -> np.ndarray:
    if isinstance(op, RegisterUnitary):
        return _apply_block(states, n, op)
    if op.kind in ROTATIONS or op.kind in FIXED_MATRICES:
        return _apply_1q(states, n, op.targets[0], op.matrix(angle_values))
    c, t = op.targets
    if op.kind == "CX":
        return states[:, _cx_perm(n, c, t)]
    out = states.copy()
    idx = _both_set(n, c, t)
    if op.kind == "CZ":
        out[:, idx] *= -1.0
    else:
        out[:, idx] *= np.exp(1j * op.resolve_angle(angle_values))
    return out


def apply_gate(state: np.ndarray, gate: Gate, angle_values=None) -> np.ndarray:
    n = num_qubits_of(state)
    if max(gate.targets) >= n:
        raise ValueError(f"gate target {max(gate.targets)} out of range for {n} qubits")
    return _apply_op(np.asarray(state, dtype=complex)[None, :], n, gate, angle_values)[0]


def apply_register_unitary(state: np.ndarray, block: RegisterUnitary) -> np.ndarray:
    n = num_qubits_of(state)
    return _apply_block(np.asarray(state, dtype=complex)[None, :], n, block)[0]


def _check_params(circuit: Circuit, params) -> np.ndarray:
    params = np.asarray(params, dtype=float).reshape(-1)
    if len(params) != circuit.num_params:
        raise ValueError(f"expected {circuit.num_params} parameters, got {len(params)}")
    return params


def _initial(circuit: Circuit, state) -> np.ndarray:
    if state is None:
        return zero_state(circuit.num_qubits)
    state = np.asarray(state, dtype=complex)
    if len(state) != 2**circuit.num_qubits:
        raise ValueError("input state does not match the circuit register")
    return state


def apply_circuit(circuit: Circuit, params, state: np.ndarray | None = None) -> np.ndarray:
    """Run ``circuit`` on ``state`` (default ``|0...0>``)."""
    params = _check_params(circuit, params)
    buf = _initial(circuit, state)[None, :]
    for op in circuit.gates:
        buf = _apply_op(buf, circuit.num_qubits, op, params)
    return buf[0].copy()


@dataclass(frozen=True)
class Analytic:
    pass


@dataclass(frozen=True)
class ForwardDifference:
    epsilon: float = 1e-8

    def __post_init__(self) -> None:
        if not self.epsilon > 0:
            raise ValueError("finite-difference step must be positive")


DerivativeMode = Union[Analytic, ForwardDifference]


# --- compiled batch simulation -------------------------------------------------
# Consecutive single-qubit gates are fused per qubit into one 2x2 matrix;
# consecutive fixed two-qubit gates collapse into one gather plus phase.


@dataclass
class _Layer:
    per_qubit: dict  # qubit -> list of Gate, in program order


@dataclass
class _Perm:
    perm: np.ndarray
    phase: np.ndarray | None


def _is_fixed_2q(op) -> bool:
    return isinstance(op, Gate) and op.kind in TWO_QUBIT and op.param is None


def _is_1q(op) -> bool:
    return isinstance(op, Gate) and op.kind not in TWO_QUBIT


def _compose_perm(n: int, gates: list[Gate]) -> _Perm:
    # track new[i] = phase[i] * old[perm[i]]
    dim = 2**n
    perm = np.arange(dim)
    phase = np.ones(dim, dtype=complex)
    for g in gates:
        c, t = g.targets
        if g.kind == "CX":
            p = _cx_perm(n, c, t)
            perm, phase = perm[p], phase[p]
        else:
            factor = -1.0 if g.kind == "CZ" else np.exp(1j * g.resolve_angle(None))
            phase[_both_set(n, c, t)] *= factor
    if np.all(phase == 1.0):
        return _Perm(perm, None)
    if np.array_equal(perm, np.arange(dim)):
        return _Perm(None, phase)
    return _Perm(perm, phase)


def _compile(circuit: Circuit) -> tuple:
    cached = circuit.__dict__.get("_compiled")
    if cached is not None:
        return cached
    steps: list = []
    ops = list(circuit.gates)
    i = 0
    while i < len(ops):
        op = ops[i]
        if _is_1q(op):
            layer: dict = {}
            while i < len(ops) and _is_1q(ops[i]):
                layer.setdefault(ops[i].targets[0], []).append(ops[i])
                i += 1
            steps.append(_Layer(layer))
        elif _is_fixed_2q(op):
            run = []
            while i < len(ops) and _is_fixed_2q(ops[i]):
                run.append(ops[i])
                i += 1
            steps.append(_compose_perm(circuit.num_qubits, run))
        else:
            steps.append(op)
            i += 1
    # frozen dataclass: stash the compiled form on the instance
    object.__setattr__(circuit, "_compiled", tuple(steps))
    return circuit.__dict__["_compiled"]


def _fused(gates: list[Gate], params, override: tuple[int, np.ndarray] | None = None) -> np.ndarray:
    m = np.eye(2, dtype=complex)
    for pos, g in enumerate(gates):
        m = g.matrix(params) @ m
        if override is not None and override[0] == pos:
            m = override[1] @ m
    return m


_CHUNK = 4


def _apply_layer(states: np.ndarray, n: int, fused: dict) -> np.ndarray:
    """Apply per-qubit 2x2 matrices as Kronecker products over qubit chunks."""
    eye = np.eye(2, dtype=complex)
    for s in range(0, n, _CHUNK):
        w = min(_CHUNK, n - s)
        qubits = [q for q in range(s, s + w) if q in fused]
        if not qubits:
            continue
        mat = np.ones((1, 1), dtype=complex)
        for q in range(s, s + w):
            mat = np.kron(fused.get(q, eye), mat)
        states = _apply_dense(states, n, mat, s, w)
    return states


def run_batch(
    circuit: Circuit, params, mode: DerivativeMode | None = None, state: np.ndarray | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(psi, dpsi)`` with ``dpsi[k] = d psi / d theta_k``.

    Row ``k`` of the working buffer is created only when the gate carrying
    parameter ``k`` is reached, so every step acts on the rows that exist so
    far. Analytic rows get ``-i sigma / 2`` inserted after the rotation;
    forward-difference rows are the circuit run at ``theta + eps e_k``.
    """
    mode = ForwardDifference() if mode is None else mode
    analytic = isinstance(mode, Analytic)
    params = _check_params(circuit, params)
    n, num_p = circuit.num_qubits, circuit.num_params
    buf = np.zeros((num_p + 1, 2**n), dtype=complex)
    buf[0] = _initial(circuit, state)
    active = 1
    for step in _compile(circuit):
        if isinstance(step, _Layer):
            fused = {q: _fused(gs, params) for q, gs in step.per_qubit.items()}
            buf[:active] = _apply_layer(buf[:active], n, fused)
            new = []
            for q, gs in step.per_qubit.items():
                for pos, g in enumerate(gs):
                    if g.param is None:
                        continue
                    if analytic:
                        if g.kind not in ROTATIONS:
                            raise ValueError(f"analytic derivative needs a rotation gate, got {g.kind}")
                        alt = _fused(gs, params, (pos, -0.5j * PAULI[g.kind]))
                    else:
                        shifted = params.copy()
                        shifted[g.param] += mode.epsilon
                        alt = _fused(gs, shifted)
                    new.append((g.param, q, alt @ fused[q].conj().T))
            # rows must follow program order of the parameter slots
            rank = {p: r for r, p in enumerate(circuit.slot_order)}
            for p, q, x in sorted(new, key=lambda e: rank[e[0]]):
                buf[active] = _apply_1q(buf[:1], n, q, x)[0]
                active += 1
        elif isinstance(step, _Perm):
            rows = buf[:active]
            if step.perm is not None:
                rows = rows[:, step.perm]
            if step.phase is not None:
                rows = rows * step.phase
            buf[:active] = rows
        elif isinstance(step, RegisterUnitary):
            buf[:active] = _apply_block(buf[:active], n, step)
        else:
            # parameterized two-qubit gate
            if analytic:
                raise ValueError(f"analytic derivative needs a rotation gate, got {step.kind}")
            shifted = params.copy()
            shifted[step.param] += mode.epsilon
            new_row = _apply_op(buf[:1], n, step, shifted)
            buf[:active] = _apply_op(buf[:active], n, step, params)
            buf[active] = new_row[0]
            active += 1
    psi = buf[0].copy()
    rows = np.empty((num_p, 2**n), dtype=complex)
    rows[list(circuit.slot_order)] = buf[1:]
    if not analytic:
        rows = (rows - psi) / mode.epsilon
    return psi, rows


def simulate(circuit: Circuit, params, state: np.ndarray | None = None) -> np.ndarray:
    """Fast path for ``U(theta)|state>`` through the compiled circuit."""
    params = _check_params(circuit, params)
    n = circuit.num_qubits
    buf = _initial(circuit, state)[None, :].copy()
    for step in _compile(circuit):
        if isinstance(step, _Layer):
            buf = _apply_layer(buf, n, {q: _fused(gs, params) for q, gs in step.per_qubit.items()})
        elif isinstance(step, _Perm):
            if step.perm is not None:
                buf = buf[:, step.perm]
            if step.phase is not None:
                buf = buf * step.phase
        else:
            buf = _apply_op(buf, n, step, params)
    return buf[0]


def derivative_state(
    circuit: Circuit, params, k: int, mode: DerivativeMode | None = None, state=None
) -> np.ndarray:
    """Single derivative state ``|d psi / d theta_k>``."""
    mode = ForwardDifference() if mode is None else mode
    params = _check_params(circuit, params)
    if not 0 <= k < circuit.num_params:
        raise IndexError(f"parameter index {k} out of range")
    if isinstance(mode, ForwardDifference):
        shifted = params.copy()
        shifted[k] += mode.epsilon
        return (apply_circuit(circuit, shifted, state) - apply_circuit(circuit, params, state)) / mode.epsilon
    gate = circuit.gate_for_param(k)
    if gate.kind not in ROTATIONS:
        raise ValueError(f"analytic derivative needs a rotation gate, got {gate.kind}")
    n = circuit.num_qubits
    buf = _initial(circuit, state)[None, :]
    for op in circuit.gates:
        buf = _apply_op(buf, n, op, params)
        if op is gate:
            buf = _apply_1q(buf, n, gate.targets[0], -0.5j * PAULI[gate.kind])
    return buf[0].copy()


# --- QFT ----------------------------------------------------------------------


def qft_matrix(num_qubits: int) -> np.ndarray:
    """``F[k, j] = exp(+2 pi i j k / N) / sqrt(N)``."""
    if num_qubits < 1:
        raise ValueError("QFT needs at least one qubit")
    big_n = 2**num_qubits
    j = np.arange(big_n)
    phase = np.outer(j, j) % big_n
    return np.exp(2j * np.pi * phase / big_n) / np.sqrt(big_n)


def qft_block(num_qubits: int, start: int = 0) -> RegisterUnitary:
    return RegisterUnitary(qft_matrix(num_qubits), start, "QFT")
