"""Locally optimal experimental designs for generalized linear models."""

from ._core import (
    Basis,
    Box,
    CandidatePool,
    CriterionSpec,
    Design,
    EidesignError,
    EquivalenceResult,
    GlmModel,
    InfoMatrix,
    Link,
    Measure,
    MomentMatrix,
    Quadrature,
    SeqConfig,
    SeqReport,
    WeightOptConfig,
    WeightOptReport,
    __version__,
    basis_eval,
    criterion_value,
    criterion_value_info,
    equivalence_check,
    explicit_pool,
    fisher_information,
    glm_weight,
    grid_pool,
    mean_deriv_sq,
    moment_matrix,
    multiplicative_step,
    optimize_weights,
    orthogonalize_basis,
    point_derivative,
    run_sequential,
    sobol_pool,
    spd_power,
    weight_optimality_gap,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
