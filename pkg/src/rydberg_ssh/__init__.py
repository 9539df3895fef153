"""rydberg-ssh: SSH-model dynamics in a synthetic lattice of Rydberg levels."""

from rydberg_ssh.config import Experiment, RunConfig, load_config
from rydberg_ssh.dynamics import (
    CLOSED_SYSTEM,
    DecoherenceParams,
    PopulationTrajectory,
    evolve,
    fractionalize,
)
from rydberg_ssh.lattice import HamiltonianMatrix, LatticeSpec, build_hamiltonian
from rydberg_ssh.runner import RunSummary, run
from rydberg_ssh.sfi import RampParams, SFITrace, UnmixResult, unmix
from rydberg_ssh.spectral import DressedSpectrum, diagonalize, edge_splitting, project_bare

__all__ = [
    "CLOSED_SYSTEM",
    "DecoherenceParams",
    "DressedSpectrum",
    "Experiment",
    "HamiltonianMatrix",
    "LatticeSpec",
    "PopulationTrajectory",
    "RampParams",
    "RunConfig",
    "RunSummary",
    "SFITrace",
    "UnmixResult",
    "build_hamiltonian",
    "diagonalize",
    "edge_splitting",
    "evolve",
    "fractionalize",
    "load_config",
    "project_bare",
    "run",
    "unmix",
]
