"""Variational time evolution of grid-encoded wavepackets on an emulated quantum register."""

from gridvte.ansatz import FORMS, Ansatz, SpaceWrapper, build_ansatz, full_hilbert_params, prepare_state
from gridvte.diagonalizer import Diagonalizer, diagonalize_sorted, ld_diagonalizers, threshold_matrix
from gridvte.grid import (
    DenseHamiltonian,
    GridHamiltonian,
    GridSpec,
    PotentialSpec,
    WavepacketParams,
    exact_evolve,
    gaussian_wavepacket,
)
from gridvte.qsim import Analytic, Circuit, ForwardDifference, Gate, RegisterUnitary
from gridvte.vqte import (
    AdaptiveRK45,
    EvolutionConfig,
    ExactStatevector,
    ExplicitRK8,
    FixedRK4,
    ShotBased,
    TrajectoryRecord,
    assemble,
    evolve,
    fit_initial_params,
    solve_thetadot,
)

__version__ = "0.1.0"

__all__ = [
    "FORMS",
    "Ansatz",
    "SpaceWrapper",
    "build_ansatz",
    "full_hilbert_params",
    "prepare_state",
    "Diagonalizer",
    "diagonalize_sorted",
    "ld_diagonalizers",
    "threshold_matrix",
    "DenseHamiltonian",
    "GridHamiltonian",
    "GridSpec",
    "PotentialSpec",
    "WavepacketParams",
    "exact_evolve",
    "gaussian_wavepacket",
    "Analytic",
    "Circuit",
    "ForwardDifference",
    "Gate",
    "RegisterUnitary",
    "AdaptiveRK45",
    "EvolutionConfig",
    "ExactStatevector",
    "ExplicitRK8",
    "FixedRK4",
    "ShotBased",
    "TrajectoryRecord",
    "assemble",
    "evolve",
    "fit_initial_params",
    "solve_thetadot",
]
