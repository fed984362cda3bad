"""Grid-encoded first-quantized Hamiltonians.

Each spatial dimension holds ``N = 2**qubits_per_dim`` points and occupies a
contiguous qubit register; dimension 0 sits on the lowest-order qubits. The
kinetic term is diagonal in the basis reached by the per-dimension QFT block
``F[k, j] = exp(+2 pi i j k / N) / sqrt(N)``, which equals
``numpy.fft.ifft(..., norm="ortho")``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

DENSE_CAP = 4096


@dataclass(frozen=True)
class GridSpec:
    num_dims: int
    qubits_per_dim: int
    length: tuple[float, ...]
    origin: tuple[float, ...]

    def __post_init__(self) -> None:
        length = tuple(float(v) for v in np.atleast_1d(self.length))
        origin = tuple(float(v) for v in np.atleast_1d(self.origin))
        if self.num_dims < 1 or self.qubits_per_dim < 1:
            raise ValueError("need num_dims >= 1 and qubits_per_dim >= 1")
        if len(length) == 1 and self.num_dims > 1:
            length = length * self.num_dims
        if len(origin) == 1 and self.num_dims > 1:
            origin = origin * self.num_dims
        if len(length) != self.num_dims or len(origin) != self.num_dims:
            raise ValueError("length/origin must have one entry per dimension")
        if min(length) <= 0:
            raise ValueError("box length must be positive")
        object.__setattr__(self, "length", length)
        object.__setattr__(self, "origin", origin)

    @classmethod
    def centered(cls, num_dims: int, qubits_per_dim: int, length: float) -> "GridSpec":
        return cls(num_dims, qubits_per_dim, (length,) * num_dims, (-length / 2,) * num_dims)

    @property
    def points_per_dim(self) -> int:
        return 2**self.qubits_per_dim

    @property
    def num_qubits(self) -> int:
        return self.num_dims * self.qubits_per_dim

    @property
    def size(self) -> int:
        return self.points_per_dim**self.num_dims

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(ell / self.points_per_dim for ell in self.length)


def build_grids(spec: GridSpec) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Position and momentum grids per dimension.

    Momenta use FFT-frequency ordering: ``p_k = 2 pi k / L`` for ``k < N/2``
    and ``2 pi (k - N) / L`` otherwise.
    """
    n = spec.points_per_dim
    k = np.arange(n)
    signed = np.where(k < n // 2, k, k - n)
    xs = [x0 + dx * k for x0, dx in zip(spec.origin, spec.spacing)]
    ps = [2.0 * np.pi * signed / ell for ell in spec.length]
    return xs, ps


def mesh(spec: GridSpec) -> list[np.ndarray]:
    """Coordinates of every flattened grid point, one array per dimension."""
    xs, _ = build_grids(spec)
    return _flat_axes(spec, xs)


def _flat_axes(spec: GridSpec, per_dim: Sequence[np.ndarray]) -> list[np.ndarray]:
    n = spec.points_per_dim
    idx = np.arange(spec.size)
    return [per_dim[d][(idx // n**d) % n] for d in range(spec.num_dims)]


def grid_index_nearest(spec: GridSpec, dim: int, value: float) -> int:
    xs, _ = build_grids(spec)
    return int(np.argmin(np.abs(xs[dim] - value)))


def to_momentum(spec: GridSpec, states: np.ndarray) -> np.ndarray:
    """Apply the per-dimension QFT blocks to a state or a batch of states (last axis)."""
    return _transform(spec, states, np.fft.ifftn)


def from_momentum(spec: GridSpec, states: np.ndarray) -> np.ndarray:
    return _transform(spec, states, np.fft.fftn)


def _transform(spec: GridSpec, states: np.ndarray, fn) -> np.ndarray:
    states = np.asarray(states, dtype=complex)
    lead = states.shape[:-1]
    shaped = states.reshape(lead + (spec.points_per_dim,) * spec.num_dims)
    axes = tuple(range(len(lead), len(lead) + spec.num_dims))
    return fn(shaped, axes=axes, norm="ortho").reshape(states.shape)


# --- potentials ---------------------------------------------------------------


@dataclass(frozen=True)
class PotentialSpec:
    """Potential energy surface.

    ``kind`` is one of ``free``, ``harmonic`` (coeffs ``(c1,)``), ``eckart``
    (``(c2, c3)``), ``mexican_hat`` (``(c4, c5)``) or ``tabulated``.
    """

    kind: str
    coeffs: tuple[float, ...] = ()
    values: np.ndarray | None = field(default=None, compare=False)

    _ARITY = {"free": 0, "harmonic": 1, "eckart": 2, "mexican_hat": 2, "tabulated": 0}

    def __post_init__(self) -> None:
        if self.kind not in self._ARITY:
            raise ValueError(f"unknown potential kind {self.kind!r}")
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        if len(self.coeffs) != self._ARITY[self.kind]:
            raise ValueError(f"{self.kind} potential takes {self._ARITY[self.kind]} coefficient(s)")
        if self.kind == "tabulated" and self.values is None:
            raise ValueError("tabulated potential needs values")

    def evaluate(self, spec: GridSpec) -> np.ndarray:
        coords = mesh(spec)
        if self.kind == "free":
            return np.zeros(spec.size)
        if self.kind == "tabulated":
            v = np.asarray(self.values, dtype=float).reshape(-1)
            if len(v) != spec.size:
                raise ValueError(f"tabulated potential has {len(v)} values, grid has {spec.size}")
            return v.copy()
        if self.kind in ("harmonic", "eckart") and spec.num_dims != 1:
            raise ValueError(f"{self.kind} potential is defined for one dimension")
        if self.kind == "mexican_hat" and spec.num_dims != 2:
            raise ValueError("mexican_hat potential is defined for two dimensions")
        if self.kind == "harmonic":
            (c1,) = self.coeffs
            return c1 * coords[0] ** 2
        if self.kind == "eckart":
            c2, c3 = self.coeffs
            return c2 / np.cosh(c3 * coords[0]) ** 2
        c4, c5 = self.coeffs
        r2 = coords[0] ** 2 + coords[1] ** 2
        return c4 * r2**2 - c5 * r2


def load_tabulated_potential(path: str | Path) -> PotentialSpec:
    """Read a two-column ``index value`` text file."""
    data = np.loadtxt(path, ndmin=2)
    if data.shape[1] != 2:
        raise ValueError(f"{path}: expected two columns (grid index, value)")
    idx = data[:, 0].astype(int)
    if sorted(idx) != list(range(len(idx))):
        raise ValueError(f"{path}: grid indices must cover 0..{len(idx) - 1} once")
    values = np.empty(len(idx))
    values[idx] = data[:, 1]
    return PotentialSpec("tabulated", values=values)


# --- Hamiltonian -------------------------------------------------------------


@dataclass(eq=False)
class GridHamiltonian:
    """``H = F^dag diag(p^2 / 2m) F + diag(V)`` on a grid."""

    grid: GridSpec
    mass: float
    potential_values: np.ndarray
    psquared_values: np.ndarray
    dense_cap: int = DENSE_CAP

    def __post_init__(self) -> None:
        if not self.mass > 0:
            raise ValueError("mass must be positive")
        self.potential_values = np.asarray(self.potential_values, dtype=float)
        self.psquared_values = np.asarray(self.psquared_values, dtype=float)
        if self.potential_values.shape != (self.grid.size,):
            raise ValueError("potential values do not match the grid")
        if self.psquared_values.shape != (self.grid.size,):
            raise ValueError("p^2 values do not match the grid")

    @classmethod
    def build(cls, grid: GridSpec, potential: PotentialSpec, mass: float = 1.0, **kw) -> "GridHamiltonian":
        _, ps = build_grids(grid)
        psq = sum(p**2 for p in _flat_axes(grid, ps))
        return cls(grid, mass, potential.evaluate(grid), psq, **kw)

    @property
    def kinetic_values(self) -> np.ndarray:
        return self.psquared_values / (2.0 * self.mass)

    def apply(self, states: np.ndarray) -> np.ndarray:
        """``H|psi>`` for a state or a batch of states along the last axis."""
        kin = from_momentum(self.grid, self.kinetic_values * to_momentum(self.grid, states))
        return kin + self.potential_values * states

    def matrix(self) -> np.ndarray:
        if self.grid.size > self.dense_cap:
            raise ValueError(f"grid size {self.grid.size} exceeds dense cap {self.dense_cap}")
        eye = np.eye(self.grid.size, dtype=complex)
        f = to_momentum(self.grid, eye).T  # columns are F|j>
        h = f.conj().T @ (self.kinetic_values[:, None] * f)
        h[np.diag_indices_from(h)] += self.potential_values
        return 0.5 * (h + h.conj().T)

    @cached_property
    def spectrum(self) -> tuple[np.ndarray, np.ndarray]:
        w, v = np.linalg.eigh(self.matrix())
        w.setflags(write=False)
        v.setflags(write=False)
        return w, v


@dataclass(eq=False)
class DenseHamiltonian:
    """Hermitian matrix with the same interface as :class:`GridHamiltonian`.

    Used for small test systems that are not grid discretizations.
    """

    values: np.ndarray

    def __post_init__(self) -> None:
        h = np.asarray(self.values, dtype=complex)
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise ValueError("Hamiltonian must be a square matrix")
        if np.max(np.abs(h - h.conj().T)) > 1e-12:
            raise ValueError("Hamiltonian is not Hermitian")
        self.values = h

    def apply(self, states: np.ndarray) -> np.ndarray:
        return np.asarray(states, dtype=complex) @ self.values.T

    def matrix(self) -> np.ndarray:
        return self.values.copy()

    @cached_property
    def spectrum(self) -> tuple[np.ndarray, np.ndarray]:
        return np.linalg.eigh(self.values)


def hamiltonian_matrix(ham: GridHamiltonian) -> np.ndarray:
    return ham.matrix()


def energy_expectation(ham, state: np.ndarray) -> float:
    """Two-basis energy: potential from position probabilities, kinetic from momentum ones."""
    state = np.asarray(state, dtype=complex)
    if isinstance(ham, DenseHamiltonian):
        return float(np.vdot(state, ham.apply(state)).real)
    if state.shape != (ham.grid.size,):
        raise ValueError("state does not match the grid")
    pot = np.dot(ham.potential_values, np.abs(state) ** 2)
    kin = np.dot(ham.kinetic_values, np.abs(to_momentum(ham.grid, state)) ** 2)
    return float(pot + kin)


def exact_evolve(ham: GridHamiltonian, psi0: np.ndarray, t: float | np.ndarray) -> np.ndarray:
    """``exp(-iHt)|psi0>``; an array of times gives one row per time."""
    w, v = ham.spectrum
    coeffs = v.conj().T @ np.asarray(psi0, dtype=complex)
    ts = np.asarray(t, dtype=float)
    phases = np.exp(-1j * np.multiply.outer(ts, w))
    return (phases * coeffs) @ v.T


# --- wavepackets ---------------------------------------------------------------


@dataclass(frozen=True)
class WavepacketParams:
    x0: tuple[float, ...]
    p0: tuple[float, ...]
    width: tuple[float, ...]

    def __post_init__(self) -> None:
        for name in ("x0", "p0", "width"):
            object.__setattr__(self, name, tuple(float(v) for v in np.atleast_1d(getattr(self, name))))
        if not len(self.x0) == len(self.p0) == len(self.width):
            raise ValueError("x0, p0 and width need one entry per dimension")
        if min(self.width) <= 0:
            raise ValueError("wavepacket width must be positive")


def gaussian_wavepacket(spec: GridSpec, wp: WavepacketParams) -> np.ndarray:
    """Unit-norm samples of ``exp(-((x - x0) / 2B)^2) exp(i p0 x)``."""
    if len(wp.x0) != spec.num_dims:
        raise ValueError("wavepacket dimensionality does not match the grid")
    for d, x0 in enumerate(wp.x0):
        lo = spec.origin[d]
        if not lo <= x0 <= lo + spec.length[d]:
            raise ValueError(f"x0[{d}] = {x0} lies outside the box")
    psi = np.ones(spec.size, dtype=complex)
    for x, x0, p0, b in zip(mesh(spec), wp.x0, wp.p0, wp.width):
        psi *= np.exp(-0.25 * ((x - x0) / b) ** 2 + 1j * p0 * x)
    norm = np.linalg.norm(psi)
    if not norm > 0 or not math.isfinite(norm):
        raise ValueError("wavepacket has zero norm on this grid")
    return psi / norm


def position_moments(spec: GridSpec, state: np.ndarray, dim: int = 0) -> tuple[float, float]:
    """Mean and variance of coordinate ``dim`` from position-basis probabilities."""
    prob = np.abs(state) ** 2
    x = mesh(spec)[dim]
    mean = float(np.dot(prob, x))
    return mean, float(np.dot(prob, x * x) - mean * mean)


def periodic_width(spec: GridSpec, state: np.ndarray) -> float:
    """Spread of a 1D packet in the periodic box.

    The origin is moved so the packet is not split by the box edge: the
    standard deviation is taken over every cyclic relabelling of the grid and
    the smallest one is returned.
    """
    if spec.num_dims != 1:
        raise ValueError("periodic_width is defined for one dimension")
    prob = np.abs(np.asarray(state)) ** 2
    n = spec.points_per_dim
    j = np.arange(n) * spec.spacing[0]
    best = np.inf
    for shift in range(n):
        q = np.roll(prob, shift)
        mean = np.dot(q, j)
        best = min(best, np.dot(q, j * j) - mean * mean)
    return float(np.sqrt(max(best, 0.0)))


def momentum_second_moment(spec: GridSpec, state: np.ndarray) -> float:
    _, ps = build_grids(spec)
    psq = sum(p**2 for p in _flat_axes(spec, ps))
    return float(np.dot(psq, np.abs(to_momentum(spec, state)) ** 2))
