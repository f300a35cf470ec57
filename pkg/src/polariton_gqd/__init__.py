"""Davies-master-equation dynamics and global quantum discord for polariton chains."""

from .dynamics import EvolutionConfig, Trajectory, evolve, excitation_probabilities, find_probability_crossings
from .errors import DaviesGroupingError, GuardViolation, InputDomainError
from .measures import (
    CorrelationReport,
    GQDProfile,
    MeasurementBasis,
    OptimizationConfig,
    bipartite_gqd,
    minimize_gqd,
    mgqd,
    qd_asymmetric,
    residual_discords,
)
from .model import NetworkParams, build_hamiltonian, davies_channels

__all__ = [
    "CorrelationReport", "DaviesGroupingError", "EvolutionConfig", "GQDProfile", "GuardViolation",
    "InputDomainError", "MeasurementBasis", "NetworkParams", "OptimizationConfig", "Trajectory",
    "bipartite_gqd", "build_hamiltonian", "davies_channels", "evolve", "excitation_probabilities",
    "find_probability_crossings", "minimize_gqd", "mgqd", "qd_asymmetric", "residual_discords",
]
