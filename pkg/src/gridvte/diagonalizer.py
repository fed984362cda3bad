"""Sorted eigenbases used as local-diagonal (LD) space transformations."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from gridvte.grid import GridHamiltonian, GridSpec, PotentialSpec, grid_index_nearest
from gridvte.qsim import RegisterUnitary

DEGENERACY_TOL = 1e-10


@dataclass(frozen=True)
class Diagonalizer:
    """Unitary whose columns are eigenvectors in ascending energy order."""

    matrix: np.ndarray
    eigenvalues: np.ndarray
    source: str = "full-H"
    cut: float = 0.0

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @property
    def cnot_estimate(self) -> int:
        # isometry synthesis needs O(N^2) CNOTs; reported, never synthesized
        n = self.dimension
        return n * (n - 1)

    def as_block(self, start: int = 0) -> RegisterUnitary:
        return RegisterUnitary(self.matrix, start, f"D[{self.source}]")


def _canonical_phase(vecs: np.ndarray) -> np.ndarray:
    idx = np.argmax(np.abs(vecs), axis=0)
    lead = vecs[idx, np.arange(vecs.shape[1])]
    return vecs * (np.abs(lead) / lead)[None, :]


def _degenerate_key(col: np.ndarray) -> tuple:
    # lexicographic on (re, im) of components, rounded so roundoff cannot reorder
    r = np.round(col, 12)
    return tuple(np.column_stack([r.real, r.imag]).ravel())


def diagonalize_sorted(h: np.ndarray, source: str = "full-H", cut: float = 0.0) -> Diagonalizer:
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError("expected a square matrix")
    if np.max(np.abs(h - h.conj().T)) > 1e-10:
        raise ValueError("matrix is not Hermitian")
    w, v = np.linalg.eigh(h)
    v = _canonical_phase(v)
    order = list(range(len(w)))
    i = 0
    while i < len(w):
        j = i + 1
        while j < len(w) and w[j] - w[i] <= DEGENERACY_TOL:
            j += 1
        if j - i > 1:
            order[i:j] = sorted(order[i:j], key=lambda c: _degenerate_key(v[:, c]))
        i = j
    return Diagonalizer(v[:, order], w[order], source, cut)


def threshold_matrix(h: np.ndarray, cut: float) -> tuple[np.ndarray, float]:
    """Zero every entry with ``|h_ij| < cut``; return the matrix and its nonzero density."""
    if cut < 0:
        raise ValueError("cut must be non-negative")
    h = np.asarray(h)
    mag = np.abs(h)
    # symmetric mask keeps the result exactly Hermitian
    keep = (mag >= cut) & (mag.T >= cut)
    out = np.where(keep, h, 0)
    return out, float(np.count_nonzero(out)) / out.size


def thresholded_diagonalizer(h: np.ndarray, cut: float) -> Diagonalizer:
    hc, _ = threshold_matrix(h, cut)
    source = "full-H" if cut == 0 else f"thresholded({cut:g})"
    return diagonalize_sorted(hc, source, cut)


def axis_hamiltonian(ham: GridHamiltonian, dim: int) -> GridHamiltonian:
    """1D Hamiltonian along ``dim`` with the other coordinates at the grid point nearest 0."""
    spec = ham.grid
    n = spec.points_per_dim
    fixed = [grid_index_nearest(spec, d, 0.0) for d in range(spec.num_dims)]
    flat = np.zeros(n, dtype=int)
    for d in range(spec.num_dims):
        flat = flat + (np.arange(n) if d == dim else fixed[d]) * n**d
    line = GridSpec(1, spec.qubits_per_dim, (spec.length[dim],), (spec.origin[dim],))
    base = GridHamiltonian.build(line, PotentialSpec("free"), ham.mass)
    return GridHamiltonian(line, ham.mass, ham.potential_values[flat], base.psquared_values)


def per_dimension_diagonalizers(ham: GridHamiltonian, cut: float = 0.0) -> list[Diagonalizer]:
    if ham.grid.num_dims < 2:
        raise ValueError("per-dimension diagonalizers need at least two dimensions")
    out = []
    for d in range(ham.grid.num_dims):
        h1, _ = threshold_matrix(axis_hamiltonian(ham, d).matrix(), cut)
        src = f"per-dimension({d})" if cut == 0 else f"per-dimension({d}),thresholded({cut:g})"
        out.append(diagonalize_sorted(h1, src, cut))
    return out


def ld_diagonalizers(ham: GridHamiltonian, cut: float = 0.0) -> list[Diagonalizer]:
    """One diagonalizer per dimension register (full H in one dimension)."""
    if ham.grid.num_dims == 1:
        return [thresholded_diagonalizer(ham.matrix(), cut)]
    return per_dimension_diagonalizers(ham, cut)


# --- file exchange ---------------------------------------------------------------

_MAGIC = "gridvte-diagonalizer-v1"


def scenario_hash(payload: dict) -> str:
    blob = json.dumps(payload, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def save_diagonalizer(path: str | Path, diag: Diagonalizer, scenario: str = "", dimension: int = 0) -> None:
    header = {
        "format": _MAGIC,
        "source": diag.source,
        "cut": diag.cut,
        "dimension": dimension,
        "scenario_hash": scenario,
    }
    with open(path, "wb") as fh:
        np.savez(fh, header=np.array(json.dumps(header)), matrix=diag.matrix, eigenvalues=diag.eigenvalues)


def load_diagonalizer(path: str | Path) -> tuple[Diagonalizer, dict]:
    with np.load(path, allow_pickle=False) as data:
        header = json.loads(str(data["header"]))
        if header.get("format") != _MAGIC:
            raise ValueError(f"{path}: not a diagonalizer file")
        diag = Diagonalizer(data["matrix"], data["eigenvalues"], header["source"], float(header["cut"]))
    return diag, header
