from .kernel import BACKEND
from .simulator import (
    PlanSummary,
    ScenarioConfig,
    SimMetrics,
    erlang_b,
    evaluate_plan,
    generate_calls,
    run_hca_simulation,
    scenario_bounds,
    scenario_probabilities,
    split_channels,
)

__all__ = [
    "BACKEND",
    "PlanSummary",
    "ScenarioConfig",
    "SimMetrics",
    "erlang_b",
    "evaluate_plan",
    "generate_calls",
    "run_hca_simulation",
    "scenario_bounds",
    "scenario_probabilities",
    "split_channels",
]
