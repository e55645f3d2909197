"""Controllability/observability index bounds for structured linear systems.

Computes, for a structured pair (A, B) given only by its zero/nonzero
pattern: the generic controllable-subspace dimension, a tight lower bound
on the structural controllability index via one min-cost max-flow,
cactus-structure upper bounds, the exact index for single-input systems,
and independent randomized-realization oracles to validate them all.
"""
from ._kernels import BACKEND as KERNEL_BACKEND
from .errors import InvariantViolation, SizeCapError, ValidationError
from .indices import (
    GapWitness,
    IndexReport,
    MuLowResult,
    UpperBoundResult,
    analyze,
    controllable_dimension,
    gk_estimate_prior_method,
    linking_dimension,
    linking_profile,
    mu_exact_single_input,
    mu_low,
    mu_upper_cactus,
    observability_index_bounds,
    search_gap_instances,
)
from .pattern import (
    PRIME_FIELD_MODULUS,
    Realization,
    SparsityPattern,
    StructuredSystem,
    SystemDigraph,
    build_digraph,
    parse_system,
    random_er_system,
    sample_realization,
    serialize_system,
)

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND",
    "PRIME_FIELD_MODULUS",
    "GapWitness",
    "IndexReport",
    "InvariantViolation",
    "MuLowResult",
    "Realization",
    "SizeCapError",
    "SparsityPattern",
    "StructuredSystem",
    "SystemDigraph",
    "UpperBoundResult",
    "ValidationError",
    "analyze",
    "build_digraph",
    "controllable_dimension",
    "gk_estimate_prior_method",
    "linking_dimension",
    "linking_profile",
    "mu_exact_single_input",
    "mu_low",
    "mu_upper_cactus",
    "observability_index_bounds",
    "parse_system",
    "random_er_system",
    "sample_realization",
    "search_gap_instances",
    "serialize_system",
    "__version__",
]
