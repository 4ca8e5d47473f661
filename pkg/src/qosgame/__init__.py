"""QoS satisfaction games for spectrum sharing."""
from .game import (Game, GameError, RateSpec, build_game, congestion, derive_threshold,
                   is_natural, rate, satisfied_count, shannon_capacity, utility, welfare)
from .spatial import (InterferenceGraph, SpatialGame, complete_graph, local_congestion,
                      neighborhood, random_geometric_graph, spatial_utility)
from .dynamics import (InvariantViolation, Trace, best_response_set, better_responses,
                       is_pure_nash, potential2, run_better_response)

__version__ = "0.1.0"
