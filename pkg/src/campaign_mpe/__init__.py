"""Two-player discounted zero-sum campaign game engine.

Models a military campaign as a stochastic game over objectives partitioned
into ordered axes, solves for Markov perfect equilibria by value iteration
over the achievable state space, and provides auditing, certification,
simulation, and an interactive session service.
"""

from .core import (
    ActionProfile,
    Axis,
    AxisKind,
    AxisType,
    Campaign,
    CampaignError,
    Commander,
    NONE_ORDER,
    Objective,
    Order,
    OrderKind,
    State,
    UnachievableStateError,
)
from .transitions import (
    ImprovementEntry,
    Override,
    ProbabilityModel,
    validate_assumptions,
)
from .solver import (
    PolicyProfile,
    SolveReport,
    SolverError,
    accelerated_vi,
    apply_bellman,
    iteration_bound,
    shapley_vi,
)
from .analysis import (
    CertificationReport,
    Trajectory,
    certify_epsilon_mpe,
    check_isotonicity,
    evaluate_policy,
    simulate,
)
from .scenario_io import (
    ScenarioError,
    Solution,
    load_scenario,
    load_solution,
    save_scenario,
    save_solution,
    scenario_digest,
)

__version__ = "0.1.0"
