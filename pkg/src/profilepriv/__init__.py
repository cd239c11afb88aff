"""Profile-based privacy: mechanism synthesis, sampling and verification over graphs of discrete profiles."""

from .baselines import LdpMechanism, as_profile_mechanism, randomized_response
from .errors import (
    DimensionMismatch,
    DomainError,
    GraphValidationError,
    NumericalFailure,
    UncertifiedComposition,
)
from .graph import Profile, ProfileGraph, bernoulli, connected_components, make_graph, validate
from .lp import LinearProgram, LpSolution, LpStatus, solve, solve_minimax
from .mechanisms import (
    Mechanism,
    Release,
    apply,
    apply_many,
    one_bit_cluster,
    smooth_categorical,
    smooth_one_bit,
    two_profile_flip,
)
from .verifier import (
    PrivacyReport,
    check_additive_composition,
    check_parallel_composition,
    check_post_processing,
    verify_exact,
    verify_monte_carlo,
)

__version__ = "0.1.0"
