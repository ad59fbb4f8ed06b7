"""Temporal quasiprobabilities for multi-time quantum processes.

Kirkwood-Dirac style distributions (right, left, doubled) over measurement
schedules against a chain of CPTP steps, their nonclassicality, temporal
state operators and correlator tomography, characteristic functions with an
interferometric simulator, and brute-force oracles for cross-checking.
"""

from __future__ import annotations

from .channels import (
    CptpReport,
    Instrument,
    QuantumChannel,
    adjoint_apply,
    apply_channel,
    build_channel,
    check_density,
    compose,
    identity_channel,
    jamiolkowski,
    mix_channels,
    stinespring,
    tensor_channels,
    validate_cptp,
)
from .charfunc import (
    CharSamples,
    CircuitResult,
    ObservableSchedule,
    char_fn,
    char_from_distribution,
    circuit_sim,
    default_nodes,
    invert_char,
    product_grid,
)
from .linops import (
    ValidationError,
    basis_state,
    dagger,
    embed_operator,
    hermitian_eig,
    kron,
    kron_chain,
    partial_trace,
    projector,
    spectral_norm,
)
from .measurements import (
    HSBasis,
    Outcome,
    ProjectiveMeasurement,
    hs_basis,
    product_measurement,
    rotate_basis,
    spectral_measurement,
    trivial_measurement,
)
from .oracle import oracle_kd, oracle_state
from .quasiprob import (
    JointMeasurementOperators,
    MultiTimeProcess,
    QuasiDistribution,
    WitnessReport,
    classicality_witness,
    coarse_grain,
    extended_kd,
    haar_unitary,
    joint_ops,
    kd_doubled,
    kd_left,
    kd_right,
    lvn,
    marginalize,
    mh_from_kd,
    nonclassicality,
    random_channel,
    random_density,
    random_hermitian,
    random_process,
    random_pure_state,
    random_schedule,
    sub_process,
    tensor_process,
    tensor_schedule,
    weak_value,
)
from .tomography import (
    CorrelatorTensor,
    TemporalStateOperator,
    born_eval,
    correlators,
    kd_state_recursive,
    mh_state,
    pdo,
    reconstruct_state,
    reduce_state,
    star,
    trace_bra_block,
    trace_ket_block,
)

__version__ = "0.1.0"

__all__ = [
    "CharSamples",
    "CircuitResult",
    "CorrelatorTensor",
    "CptpReport",
    "HSBasis",
    "Instrument",
    "JointMeasurementOperators",
    "MultiTimeProcess",
    "ObservableSchedule",
    "Outcome",
    "ProjectiveMeasurement",
    "QuantumChannel",
    "QuasiDistribution",
    "TemporalStateOperator",
    "ValidationError",
    "WitnessReport",
    "adjoint_apply",
    "apply_channel",
    "basis_state",
    "born_eval",
    "build_channel",
    "char_fn",
    "char_from_distribution",
    "check_density",
    "circuit_sim",
    "classicality_witness",
    "coarse_grain",
    "compose",
    "correlators",
    "dagger",
    "default_nodes",
    "embed_operator",
    "extended_kd",
    "haar_unitary",
    "hermitian_eig",
    "hs_basis",
    "identity_channel",
    "invert_char",
    "jamiolkowski",
    "joint_ops",
    "kd_doubled",
    "kd_left",
    "kd_right",
    "kd_state_recursive",
    "kron",
    "kron_chain",
    "lvn",
    "marginalize",
    "mh_from_kd",
    "mh_state",
    "mix_channels",
    "nonclassicality",
    "oracle_kd",
    "oracle_state",
    "partial_trace",
    "pdo",
    "product_grid",
    "product_measurement",
    "projector",
    "random_channel",
    "random_density",
    "random_hermitian",
    "random_process",
    "random_pure_state",
    "random_schedule",
    "reconstruct_state",
    "reduce_state",
    "rotate_basis",
    "spectral_measurement",
    "spectral_norm",
    "star",
    "stinespring",
    "sub_process",
    "tensor_channels",
    "tensor_process",
    "tensor_schedule",
    "trace_bra_block",
    "trace_ket_block",
    "trivial_measurement",
    "validate_cptp",
    "weak_value",
]
