"""Bounded plan-set generation from Monte Carlo search trees.

Build a tree over any black-box simulator with :func:`run_search`, then pull
out plans with :func:`extract_plans`: the single best plan (k=1), the top-k,
everything above a quality floor, or a maximally high-quality set whose
members stay pairwise diverse.  Extraction is a pure read of the finished
tree, so different bounds can be re-applied without searching again.
"""

from .extraction import (
    EmptyTreeError,
    ExtractionConfig,
    PlanStem,
    TreeTooLargeError,
    brute_force_enumerate,
    extract_plans,
    greedy_diverse_filter,
)
from .gridworld import (
    ACTION_NAMES,
    DroneState,
    ExecutionOutcome,
    GridWorld,
    PlanningSimulator,
    default_policy_action,
    execute_plan,
    generate_instance,
    parse_map,
    render_map,
    shortest_unobstructed_path,
)
from .mcts import (
    BanditConfig,
    Policy,
    SearchConfig,
    Simulator,
    SimulatorError,
    diverse_ucb1_score,
    rollout,
    run_search,
    ucb1_score,
)
from .metrics import (
    Plan,
    PlanSet,
    absolute_quality,
    materialize_plan,
    min_pairwise_diversity,
    relative_plan_quality,
    state_set_distance,
)
from .experiment import (
    ExperimentConfig,
    PlannerKind,
    PlannerSpec,
    ResultRecord,
    desk_profile,
    paper_profile,
    run_experiment,
    run_random_baseline,
    summarize,
    two_proportion_z_test,
)
from .tree import NodeRecord, SearchTree, ValueMode

__version__ = "0.1.0"

__all__ = [
    "ACTION_NAMES",
    "BanditConfig",
    "DroneState",
    "EmptyTreeError",
    "ExecutionOutcome",
    "ExperimentConfig",
    "ExtractionConfig",
    "GridWorld",
    "NodeRecord",
    "Plan",
    "PlanSet",
    "PlanStem",
    "PlannerKind",
    "PlannerSpec",
    "PlanningSimulator",
    "Policy",
    "ResultRecord",
    "SearchConfig",
    "SearchTree",
    "Simulator",
    "SimulatorError",
    "TreeTooLargeError",
    "ValueMode",
    "absolute_quality",
    "brute_force_enumerate",
    "default_policy_action",
    "desk_profile",
    "diverse_ucb1_score",
    "execute_plan",
    "extract_plans",
    "generate_instance",
    "greedy_diverse_filter",
    "materialize_plan",
    "min_pairwise_diversity",
    "paper_profile",
    "parse_map",
    "relative_plan_quality",
    "render_map",
    "rollout",
    "run_experiment",
    "run_random_baseline",
    "run_search",
    "shortest_unobstructed_path",
    "state_set_distance",
    "summarize",
    "two_proportion_z_test",
    "ucb1_score",
]
