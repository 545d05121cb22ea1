"""Generalized measurements, CP maps and Unruh/Fell examples on truncated Fock spaces."""

__version__ = "0.1.0"

from .hilbert import (
    DensityMatrix,
    FockSpace,
    Operator,
    ProductSpace,
    annihilation_op,
    basis_state,
    creation_op,
    expectation,
    expm_antihermitian,
    identity,
    maximally_mixed,
    mode_op,
    number_op,
    partial_trace,
    pure_state,
    tensor_product,
    trace_distance,
)
from .povm import (
    POVM,
    PVM,
    neumark_dilate,
    probabilities,
    simulate_frequencies,
    spectral_pvm,
    validate_povm,
)
from .channel import (
    AlgebraicState,
    KrausChannel,
    Representation,
    adjoint_channel,
    apply,
    choi_from_kraus,
    compose,
    kraus_from_choi,
    pushforward,
)
from .unruh import (
    SqueezingParams,
    compare_representations,
    conjugate_povm,
    detector_povm,
    rindler_thermal_state,
    two_mode_squeezed_state,
)
from .fell import FellProblem, ObservableConstraint, certify, make_constraints, solve_fell

__all__ = [
    "__version__",
    "DensityMatrix",
    "FockSpace",
    "Operator",
    "ProductSpace",
    "annihilation_op",
    "basis_state",
    "creation_op",
    "expectation",
    "expm_antihermitian",
    "identity",
    "maximally_mixed",
    "mode_op",
    "number_op",
    "partial_trace",
    "pure_state",
    "tensor_product",
    "trace_distance",
    "POVM",
    "PVM",
    "neumark_dilate",
    "probabilities",
    "simulate_frequencies",
    "spectral_pvm",
    "validate_povm",
    "AlgebraicState",
    "KrausChannel",
    "Representation",
    "adjoint_channel",
    "apply",
    "choi_from_kraus",
    "compose",
    "kraus_from_choi",
    "pushforward",
    "SqueezingParams",
    "compare_representations",
    "conjugate_povm",
    "detector_povm",
    "rindler_thermal_state",
    "two_mode_squeezed_state",
    "FellProblem",
    "ObservableConstraint",
    "certify",
    "make_constraints",
    "solve_fell",
]
