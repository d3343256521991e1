"""Coherent-state variational dynamics for the driven Bose-Hubbard chain."""
from .coherent import GCSEnsemble, GCSParams, gcs_overlap, gcs_to_fock, project_state
from .engine import EngineConfig, assemble_blocks, propagate_gcs, regularized_solve
from .grid import GridMode, GridSpec, sample_ensemble
from .model import (
    HamiltonianParams,
    build_hamiltonian,
    enumerate_fock_basis,
    fock_dimension,
    propagate_fock,
)
from .scenarios import ConfigError, ScenarioConfig, SweepConfig, load_preset, run_scenario, run_sweep, validate_config
from .trajectory import PropagationError, Trajectory

__all__ = [
    "ConfigError", "EngineConfig", "GCSEnsemble", "GCSParams", "GridMode", "GridSpec",
    "HamiltonianParams", "PropagationError", "ScenarioConfig", "SweepConfig", "Trajectory",
    "assemble_blocks", "build_hamiltonian", "enumerate_fock_basis", "fock_dimension",
    "gcs_overlap", "gcs_to_fock", "load_preset", "project_state", "propagate_fock",
    "propagate_gcs", "regularized_solve", "run_scenario", "run_sweep", "sample_ensemble",
    "validate_config",
]
