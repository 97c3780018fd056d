"""Pseudo-density matrices, spatiotemporal Born-rule quasiprobabilities,
and temporal non-classicality witnesses."""

from .channels import (
    QuantumChannel,
    apply_channel,
    apply_channel_via_choi,
    choi_from_kraus,
    make_depolarizing,
    make_identity,
    make_rabi,
    make_unitary,
    rabi_unitary,
    unitary_from_hamiltonian,
)
from .errors import (
    ConfigError,
    DimensionMismatchError,
    EigenConvergenceError,
    NotDensityMatrixError,
    NotHermitianError,
    NotUnitaryError,
    NumericalInconsistencyError,
)
from .linalg import (
    PAULI_I,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    PAULIS,
    HermitianEigenDecomposition,
    anticommutator,
    hermitian_eig,
    partial_trace,
    partial_transpose,
    tensor_product,
    trace_norm,
)
from .pdm import (
    Pdm,
    all_pauli_correlations,
    marginal,
    negativity,
    pauli_correlation,
    pauli_string_matrix,
    pdm_extend,
    pdm_from_correlations,
    pdm_two_step,
    validate_density_matrix,
)
from .quasiprob import (
    DisturbanceBreakdown3,
    NsitConditionReport,
    ProjectiveMeasurement,
    QuasiDistribution,
    bloch_measurement,
    born_quasi_from_pdm,
    born_quasi_three,
    born_quasi_two,
    disturbance_three,
    disturbance_two,
    lueders_three,
    lueders_two,
    margenau_hill_two,
    measurement_from_observable,
    nsit_condition_report,
    nsit_deviation_two,
    nsit_quantifier_three,
    nsit_quantifier_two,
    pauli_axis_measurement,
)
from .witness import (
    LgiVariantResult,
    MrCertificate,
    NonclassicalityReport,
    TemporalEntanglement,
    chsh_max,
    chsh_optimal_settings,
    chsh_value,
    lgi_full_class,
    lgi_k3,
    mr_certificate,
    nonclassicality_report,
    pauli_correlation_matrix,
    temporal_entanglement,
)

__version__ = "0.1.0"
