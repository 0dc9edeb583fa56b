"""decolab: density-matrix circuit simulation under depolarizing noise.

Simulates layered mixed-state circuits with a per-qubit depolarization round
between layers and quantifies, exactly at desk scale, how computations above
the noise threshold ``eta > 1 - 1/k`` collapse within logarithmic depth.
"""

from .analysis import (
    BoundSeries,
    DistanceReport,
    ThresholdInfo,
    analytic_bound,
    check_noise_action,
    distance_profile,
    distance_report,
    empirical_d,
    f_series,
    make_probes,
    min_worthless_depth,
    pairwise_profiles,
    practically_worthless,
    theta_and_threshold,
    worthless,
)
from .channels import (
    GATES,
    QuantumChannel,
    channel_apply,
    channel_from_unitary,
    channel_tensor,
    channel_validate,
    depolarize_all,
    depolarize_qubit,
    prep_channel,
)
from .circuit import (
    Circuit,
    CircuitError,
    CircuitLayer,
    CircuitParseError,
    PlacedGate,
    Trajectory,
    parse_circuit,
    parse_circuit_file,
    random_circuit,
    run_ideal,
    run_noisy,
    serialize_circuit,
)
from .config import ResourceLimitError, Tolerances, max_qubits
from .linalg import (
    DensityMatrix,
    ValidationReport,
    hermitian_eigenvalues,
    partial_trace,
    tensor,
    trace_distance,
    validate_density,
)

__version__ = "0.1.0"

__all__ = [
    "BoundSeries",
    "Circuit",
    "CircuitError",
    "CircuitLayer",
    "CircuitParseError",
    "DensityMatrix",
    "DistanceReport",
    "GATES",
    "PlacedGate",
    "QuantumChannel",
    "ResourceLimitError",
    "ThresholdInfo",
    "Tolerances",
    "Trajectory",
    "ValidationReport",
    "analytic_bound",
    "channel_apply",
    "channel_from_unitary",
    "channel_tensor",
    "channel_validate",
    "check_noise_action",
    "depolarize_all",
    "depolarize_qubit",
    "distance_profile",
    "distance_report",
    "empirical_d",
    "f_series",
    "hermitian_eigenvalues",
    "make_probes",
    "max_qubits",
    "min_worthless_depth",
    "pairwise_profiles",
    "parse_circuit",
    "parse_circuit_file",
    "partial_trace",
    "practically_worthless",
    "prep_channel",
    "random_circuit",
    "run_ideal",
    "run_noisy",
    "serialize_circuit",
    "tensor",
    "theta_and_threshold",
    "trace_distance",
    "validate_density",
    "worthless",
]
