"""Boundary-crossing probabilities for Brownian motion with random jumps.

The estimator draws jump configurations and weights each by the exact
conditional survival probability of the continuous part, so no path
discretization enters except through nonlinear-boundary approximation.
"""

from bcp.boundary import (
    Boundary,
    ConstantBoundary,
    GeneralBoundary,
    LinearBoundary,
    MergedPartition,
    OneSidedBoundary,
    PiecewiseLinearBoundary,
    TwoSidedLinearBoundary,
    as_piecewise,
    boundary_spec,
    discretize,
    merge_partition,
    named_profiles,
    parse_boundary,
)
from bcp.engine import (
    ExperimentConfig,
    McEstimate,
    bcp,
    bcp_nonlinear_convergence,
    linear_recursion_weight,
    replication_stream,
    survival_given_jumps_one_sided,
    survival_given_jumps_two_sided,
)
from bcp.formulas import (
    LinearBoundaryParams,
    SeriesConvergenceError,
    SeriesTolerance,
    TwoSidedParams,
    anderson_chi,
    anderson_theta,
    bridge_upcross_prob,
    linear_noncross_prob,
    two_sided_segment_factor,
    two_sided_tail_prob,
)
from bcp.jumps import (
    BernoulliJumps,
    CustomCountProcess,
    DoubleExponential,
    ExponentialJumps,
    JointCustom,
    JumpCountProcess,
    JumpRealization,
    JumpSizeLaw,
    PoissonProcess,
    draw_jumps,
    poisson_tail_bound,
    sample_jump_count,
    sample_jump_heights,
    sample_jump_times,
    truncation_level,
)
from bcp.oracle import OracleConfig, simulate_bcp

__version__ = "0.1.0"

__all__ = [
    "BernoulliJumps",
    "Boundary",
    "ConstantBoundary",
    "CustomCountProcess",
    "DoubleExponential",
    "ExperimentConfig",
    "ExponentialJumps",
    "GeneralBoundary",
    "JointCustom",
    "JumpCountProcess",
    "JumpRealization",
    "JumpSizeLaw",
    "LinearBoundary",
    "LinearBoundaryParams",
    "McEstimate",
    "MergedPartition",
    "OneSidedBoundary",
    "OracleConfig",
    "PiecewiseLinearBoundary",
    "PoissonProcess",
    "SeriesConvergenceError",
    "SeriesTolerance",
    "TwoSidedLinearBoundary",
    "TwoSidedParams",
    "anderson_chi",
    "anderson_theta",
    "as_piecewise",
    "bcp",
    "bcp_nonlinear_convergence",
    "boundary_spec",
    "bridge_upcross_prob",
    "discretize",
    "draw_jumps",
    "linear_noncross_prob",
    "linear_recursion_weight",
    "merge_partition",
    "named_profiles",
    "parse_boundary",
    "poisson_tail_bound",
    "replication_stream",
    "sample_jump_count",
    "sample_jump_heights",
    "sample_jump_times",
    "simulate_bcp",
    "survival_given_jumps_one_sided",
    "survival_given_jumps_two_sided",
    "truncation_level",
    "two_sided_segment_factor",
    "two_sided_tail_prob",
]
