"""Renormalization-group decoder for the toric code under depolarizing noise."""

from .cell import CellBasis, CellGeometry, default_geometry, derive_cell_basis, renormalized_qubit_map, validate_tiling
from .harness import ExperimentSpec, estimate_threshold, run_experiment, run_trial
from .lattice import Syndrome, TorusLattice, homology_class, syndrome_of
from .noise import CellErrorModel, depolarizing_prior, sample_error
from .pauli import PauliOp, commutes, multiply, symplectic_complete, weight
from .rg import DecoderConfig, DecodeResult, cell_conditional, decode, exact_ml, marginals

__all__ = [
    "CellBasis",
    "CellErrorModel",
    "CellGeometry",
    "DecodeResult",
    "DecoderConfig",
    "ExperimentSpec",
    "PauliOp",
    "Syndrome",
    "TorusLattice",
    "cell_conditional",
    "commutes",
    "decode",
    "default_geometry",
    "depolarizing_prior",
    "derive_cell_basis",
    "estimate_threshold",
    "exact_ml",
    "homology_class",
    "marginals",
    "multiply",
    "renormalized_qubit_map",
    "run_experiment",
    "run_trial",
    "sample_error",
    "symplectic_complete",
    "syndrome_of",
    "validate_tiling",
    "weight",
]
