"""Quantum Fisher information and parameter-estimation bounds.

A small numpy/scipy toolkit for single-parameter quantum estimation on
finite-dimensional Hilbert spaces: symmetric logarithmic derivatives and
quantum Fisher information, classical Fisher information of arbitrary
POVMs, covariant measurements built from a generator's spectrum, and a
Monte-Carlo harness that verifies the estimation bound chain

    <(deltaX)^2>  >=  1/(N F)  >=  1/(N * QFI)  >=  1/(4 N var(h)).
"""

from .hilbert import (
    DensityOperator,
    EigenDecomposition,
    HermitianOperator,
    PureState,
    commutator_path_tangent,
    eig_hermitian,
    expectation,
    matrix_from_json,
    matrix_to_json,
    random_density,
    random_hermitian,
    random_pure,
    tensor_product,
    variance,
)
from .metric import (
    SLDResult,
    StateFamily,
    additivity_check,
    fubini_angle,
    qfi_unitary,
    qfi_upper_gap,
    sld,
)
from .povm import (
    CovariantPOVM,
    DiscretePOVM,
    SpectrumModel,
    build_covariant,
    classical_fisher,
    displacement_operator,
    optimality_test,
    outcome_distribution,
    sld_projective_povm,
    validate_povm,
    variance_split,
)
from .estimate import (
    BoundVerdict,
    Dataset,
    EstimationReport,
    bound_audit,
    deviation_moment,
    mle_estimate,
    sample_mean_estimate,
    sample_outcomes,
)
from . import scenarios

__version__ = "0.1.0"

__all__ = [
    "DensityOperator",
    "EigenDecomposition",
    "HermitianOperator",
    "PureState",
    "commutator_path_tangent",
    "eig_hermitian",
    "expectation",
    "matrix_from_json",
    "matrix_to_json",
    "random_density",
    "random_hermitian",
    "random_pure",
    "tensor_product",
    "variance",
    "SLDResult",
    "StateFamily",
    "additivity_check",
    "fubini_angle",
    "qfi_unitary",
    "qfi_upper_gap",
    "sld",
    "CovariantPOVM",
    "DiscretePOVM",
    "SpectrumModel",
    "build_covariant",
    "classical_fisher",
    "displacement_operator",
    "optimality_test",
    "outcome_distribution",
    "sld_projective_povm",
    "validate_povm",
    "variance_split",
    "BoundVerdict",
    "Dataset",
    "EstimationReport",
    "bound_audit",
    "deviation_moment",
    "mle_estimate",
    "sample_mean_estimate",
    "sample_outcomes",
    "scenarios",
]
