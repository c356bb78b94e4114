"""Two independent Gaussian Thompson samplers playing a repeated matrix game."""

from .choice import (
    BeliefVector,
    ChoiceDistribution,
    ChoiceGradient,
    choice_gradients,
    choice_probabilities_exact,
    choice_probabilities_mc,
    slepian_lower_bound,
)
from .dynamics import (
    PlayerState,
    RoundRecord,
    SystemState,
    init_state,
    mean_field,
    noise_vector,
    simulate_path,
    step,
)
from .game import (
    EquilibriumReport,
    PayoffGame,
    RewardModel,
    StabilityReport,
    analyze,
    builtin_game,
    check_no_ties,
    check_payoff_stability,
    equilibrium_point,
    mixed_ne_2x2,
    pure_nash_equilibria,
)

__version__ = "0.1.0"

__all__ = [
    "BeliefVector",
    "ChoiceDistribution",
    "ChoiceGradient",
    "EquilibriumReport",
    "PayoffGame",
    "PlayerState",
    "RewardModel",
    "RoundRecord",
    "StabilityReport",
    "SystemState",
    "analyze",
    "builtin_game",
    "check_no_ties",
    "check_payoff_stability",
    "choice_gradients",
    "choice_probabilities_exact",
    "choice_probabilities_mc",
    "equilibrium_point",
    "init_state",
    "mean_field",
    "mixed_ne_2x2",
    "noise_vector",
    "pure_nash_equilibria",
    "simulate_path",
    "slepian_lower_bound",
    "step",
]
