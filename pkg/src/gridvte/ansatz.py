"""Heuristic variational forms vf1..vf8 and their basis-space wrappers.

Every form alternates rotation layers with entangling blocks. ``depth`` counts
entangling blocks; for vf1-vf5 there are ``depth + 1`` rotation layers, giving
``2 * n * (depth + 1)`` parameters.

Reconstruction of the composite forms (calibrated to the reference parameter
counts on six qubits):

* vf6 - entangling block is ``CX . RZ(target) . CX`` on each linear pair; the
  closing rotation layer is ``RY RZ RY`` (one extra RY per qubit).
* vf7 - as vf6, followed by a three-qubit ``CX CX RZ CX CX`` cascade on each
  linear triple; same closing layer.
* vf8 - one depth unit is ``CZ block, rotation layer, CX.RZ.CX block,
  rotation layer``, i.e. ``2n + d (4n + n - 1)`` parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np

from gridvte import qsim
from gridvte.qsim import Circuit, DerivativeMode, Gate, RegisterUnitary

FORMS = ("vf1", "vf2", "vf3", "vf4", "vf5", "vf6", "vf7", "vf8")


@dataclass(frozen=True)
class FormSpec:
    rotations: tuple[str, ...]
    entangler: str
    coupling: str
    closing: tuple[str, ...] = ()


FORM_SPECS = {
    "vf1": FormSpec(("RY", "RZ"), "cz", "linear"),
    "vf2": FormSpec(("RY", "RZ"), "cz", "full"),
    "vf3": FormSpec(("RY", "RZ"), "cz", "circular"),
    "vf4": FormSpec(("RY", "RZ"), "cx", "linear"),
    "vf5": FormSpec(("RX", "RZ"), "cz", "linear"),
    "vf6": FormSpec(("RY", "RZ"), "cxrzcx", "linear", closing=("RY",)),
    "vf7": FormSpec(("RY", "RZ"), "cxrzcx+cascade", "linear", closing=("RY",)),
    "vf8": FormSpec(("RY", "RZ"), "cz|cxrzcx", "linear"),
}


def coupling_pairs(n: int, coupling: str) -> list[tuple[int, int]]:
    if coupling == "linear":
        return [(i, i + 1) for i in range(n - 1)]
    if coupling == "circular":
        pairs = [(i, i + 1) for i in range(n - 1)]
        if n > 2:
            pairs.append((n - 1, 0))
        return pairs
    if coupling == "full":
        return list(combinations(range(n), 2))
    raise ValueError(f"unknown coupling map {coupling!r}")


class _Builder:
    def __init__(self, n: int):
        self.n = n
        self.ops: list = []
        self.count = 0

    def rot(self, kind: str, q: int) -> None:
        self.ops.append(Gate(kind, (q,), param=self.count))
        self.count += 1

    def rotation_layer(self, kinds: Sequence[str]) -> None:
        for q in range(self.n):
            for kind in kinds:
                self.rot(kind, q)

    def fixed(self, kind: str, *targets: int) -> None:
        self.ops.append(Gate(kind, targets))

    def entangle(self, kind: str, coupling: str) -> None:
        pairs = coupling_pairs(self.n, coupling)
        if kind in ("cz", "cx"):
            for a, b in pairs:
                self.fixed(kind.upper(), a, b)
        elif kind == "cxrzcx":
            for a, b in pairs:
                self.fixed("CX", a, b)
                self.rot("RZ", b)
                self.fixed("CX", a, b)
        elif kind == "cascade":
            for a in range(self.n - 2):
                b, c = a + 1, a + 2
                self.fixed("CX", a, b)
                self.fixed("CX", b, c)
                self.rot("RZ", c)
                self.fixed("CX", b, c)
                self.fixed("CX", a, b)
        else:
            raise ValueError(f"unknown entangler {kind!r}")


def parameterized_circuit(form: str, num_qubits: int, depth: int) -> Circuit:
    """The bare ``U(theta)`` of a variational form."""
    if form not in FORM_SPECS:
        raise ValueError(f"unknown variational form {form!r}")
    if depth < 0:
        raise ValueError("depth must be >= 0")
    if num_qubits < 2 and depth > 0:
        raise ValueError("entangling forms need at least two qubits")
    spec = FORM_SPECS[form]
    b = _Builder(num_qubits)
    b.rotation_layer(spec.rotations)
    for _ in range(depth):
        if spec.entangler == "cz|cxrzcx":
            b.entangle("cz", spec.coupling)
            b.rotation_layer(spec.rotations)
            b.entangle("cxrzcx", spec.coupling)
        elif spec.entangler == "cxrzcx+cascade":
            b.entangle("cxrzcx", spec.coupling)
            b.entangle("cascade", spec.coupling)
        else:
            b.entangle(spec.entangler, spec.coupling)
        b.rotation_layer(spec.rotations)
    if spec.closing:
        b.rotation_layer(spec.closing)
    return Circuit(num_qubits, tuple(b.ops))


# --- wrappers -----------------------------------------------------------------


@dataclass(frozen=True)
class SpaceWrapper:
    """Fixed unitaries that select the representation of ``U(theta)``.

    ``kind``: ``position``, ``momentum``, ``local_diagonal`` (needs one
    diagonalizer matrix per dimension register) or ``mixed`` (needs
    ``position_depth`` and ``momentum_depth``).
    """

    kind: str = "position"
    diagonalizers: tuple[RegisterUnitary, ...] = ()
    position_depth: int = 0
    momentum_depth: int = 0
    provenance: str = ""

    def __post_init__(self) -> None:
        if self.kind not in ("position", "momentum", "local_diagonal", "mixed"):
            raise ValueError(f"unknown wrapper kind {self.kind!r}")
        if self.kind == "local_diagonal" and not self.diagonalizers:
            raise ValueError("local_diagonal wrapper needs diagonalizers")

    @classmethod
    def local_diagonal(cls, matrices: Sequence[np.ndarray], provenance: str = "") -> "SpaceWrapper":
        blocks, start = [], 0
        for m in matrices:
            blk = RegisterUnitary(np.asarray(m), start, "D")
            blocks.append(blk)
            start += blk.width
        return cls("local_diagonal", tuple(blocks), provenance=provenance)


def _qft_layer(num_dims: int, qubits_per_dim: int, inverse: bool = False) -> list[RegisterUnitary]:
    blocks = []
    for d in range(num_dims):
        blk = qsim.qft_block(qubits_per_dim, d * qubits_per_dim)
        blocks.append(blk.dagger() if inverse else blk)
    return blocks


@dataclass(frozen=True)
class Ansatz:
    form: str
    depth: int
    num_qubits: int
    wrapper: SpaceWrapper
    num_dims: int = 1
    circuit: Circuit = field(init=False, repr=False)
    suffix: tuple[RegisterUnitary, ...] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        circuit, suffix = build_ansatz(self.form, self.num_qubits, self.depth, self.wrapper, self.num_dims)
        object.__setattr__(self, "circuit", circuit)
        object.__setattr__(self, "suffix", tuple(suffix))

    @property
    def num_params(self) -> int:
        return self.circuit.num_params

    @property
    def full_circuit(self) -> Circuit:
        return self.circuit.then(*self.suffix)

    def descriptor(self) -> dict:
        d = {"form": self.form, "depth": self.depth, "wrapper": self.wrapper.kind}
        if self.wrapper.kind == "mixed":
            d["position_depth"] = self.wrapper.position_depth
            d["momentum_depth"] = self.wrapper.momentum_depth
        if self.wrapper.kind == "local_diagonal":
            d["diagonalizer"] = self.wrapper.provenance
        return d


def build_ansatz(
    form: str, num_qubits: int, depth: int, wrapper: SpaceWrapper | None = None, num_dims: int = 1
) -> tuple[Circuit, list[RegisterUnitary]]:
    """Return the parameterized circuit and the fixed unitaries appended after it.

    For the mixed wrapper the inner inverse QFT sits inside the circuit:
    ``QFT . U_b . QFT^dag . U_a``, with ``depth`` ignored in favour of the
    wrapper's two depths.
    """
    wrapper = wrapper or SpaceWrapper()
    if num_qubits % num_dims:
        raise ValueError("qubits do not split evenly over dimensions")
    per_dim = num_qubits // num_dims
    if wrapper.kind == "position":
        return parameterized_circuit(form, num_qubits, depth), []
    if wrapper.kind == "momentum":
        return parameterized_circuit(form, num_qubits, depth), _qft_layer(num_dims, per_dim)
    if wrapper.kind == "local_diagonal":
        if len(wrapper.diagonalizers) != num_dims:
            raise ValueError(f"need {num_dims} diagonalizers, got {len(wrapper.diagonalizers)}")
        for d, blk in enumerate(wrapper.diagonalizers):
            if blk.width != per_dim or blk.start != d * per_dim:
                raise ValueError(f"diagonalizer {d} does not match register {d}")
        return parameterized_circuit(form, num_qubits, depth), list(wrapper.diagonalizers)
    ua = parameterized_circuit(form, num_qubits, wrapper.position_depth)
    ub = parameterized_circuit(form, num_qubits, wrapper.momentum_depth)
    offset = ua.num_params
    shifted = [
        Gate(g.kind, g.targets, g.angle, None if g.param is None else g.param + offset) for g in ub.gates
    ]
    ops = list(ua.gates) + _qft_layer(num_dims, per_dim, inverse=True) + shifted
    return Circuit(num_qubits, tuple(ops)), _qft_layer(num_dims, per_dim)


def prepare_state(ansatz: Ansatz, theta) -> np.ndarray:
    return qsim.apply_circuit(ansatz.full_circuit, theta)


def derivative_states(ansatz: Ansatz, theta, mode: DerivativeMode | None = None) -> np.ndarray:
    """Array of shape ``(num_params, 2**n)``; row ``k`` is ``|d psi / d theta_k>``."""
    return state_and_derivatives(ansatz, theta, mode)[1]


def state_and_derivatives(ansatz: Ansatz, theta, mode: DerivativeMode | None = None):
    psi, d = qsim.run_batch(ansatz.circuit, theta, mode)
    if ansatz.suffix:
        n = ansatz.num_qubits
        stack = np.vstack([psi[None, :], d])
        for blk in ansatz.suffix:
            stack = qsim._apply_block(stack, n, blk)
        psi, d = stack[0], stack[1:]
    return psi, d


def full_hilbert_params(num_qubits: int) -> int:
    """Real parameters of an arbitrary normalized state modulo global phase."""
    return 2 * (2**num_qubits - 1)
