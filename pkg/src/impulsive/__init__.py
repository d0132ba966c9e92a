"""Numerical laboratory for linear impulsive differential equations."""

from .errors import (
    ConfigError,
    HorizonSensitivityWarning,
    HypothesisViolated,
    ImpulsiveError,
    InvalidArgumentError,
    NumericalOverflowError,
    RateUndefinedError,
    SingularFundamentalError,
    SingularJumpError,
)
from .evolution import (
    FundamentalSolution,
    NonImpulsiveEvolution,
    evolution_branch,
    evolution_from_G,
    evolution_operator,
    fundamental_matrix,
    fundamental_solution,
    scalar_product_formula,
    semigroup_residual,
)
from .integrator import Trajectory, flow, representation_solution, solve_ivp
from .probe import (
    ProbeVerdict,
    Verdict,
    delta_to_jumps,
    probe_k_estimate,
    scalar_probe,
    sign_sequence,
)
from .scenario import Scenario, load_scenario, scenario_from_dict
from .stability import (
    DecayingForcingSpec,
    StabilityCertificate,
    TransferHypotheses,
    certify_system,
    check_dominance,
    decay_transfer,
    estimate_decay_rate,
    evolution_dominance,
    fundamental_dominance,
    gronwall_bounds,
    response_bound,
    tail_sup,
    theorem21_constants,
    theorem22_constant,
    transfer_continuous_to_impulsive,
    transfer_hypotheses,
    transfer_impulsive_to_continuous,
)
from .system_model import (
    CoefficientOperator,
    Forcing,
    ImpulseSchedule,
    ImpulsiveSystem,
    JumpSequence,
    TimeFunction,
    build_uniform_schedule,
    hypothesis_bounds,
    op_norm,
    vec_norm,
)

__version__ = "0.1.0"
