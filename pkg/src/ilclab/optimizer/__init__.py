"""ILC deployment strategies for a pair of layers."""
from .baselines import greedy_shortest, max_time_weight, random_uniform
from .common import InfeasibleError, LayerPair, build_layer_pair
from .exact import BudgetExceeded, exact_ilp
from .mtwm import InfeasibleMatching, kuhn_munkres, max_weight_matching, mtwm
from .otlc import GaConfig, otlc
from .schedule import Schedule
from .strategies import STRATEGIES, run_strategy
from .tpilcd import TpilcdConfig, TpilcdResult, tpilcd

__all__ = [
    "BudgetExceeded", "GaConfig", "InfeasibleError", "InfeasibleMatching", "LayerPair", "STRATEGIES",
    "Schedule", "TpilcdConfig", "TpilcdResult", "build_layer_pair", "exact_ilp", "greedy_shortest",
    "kuhn_munkres", "max_time_weight", "max_weight_matching", "mtwm", "otlc", "random_uniform",
    "run_strategy", "tpilcd",
]
