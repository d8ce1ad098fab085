"""Mining economics of two competing blockchains.

Computes the hash-rate allocation equilibrium implied by coinbase values,
simulates miner reallocation dynamics under difficulty adjustment, prices
deviations from the equilibrium (loyal mining, chain reorganization,
issuance changes), and provides a header-chain price-ratio oracle.

The simulation event loop has a compiled kernel selected automatically at
import; a pure-Python engine with identical output is the fallback.
"""

from .econ import (
    Allocation,
    ChainSpec,
    MarketState,
    PosChainSpec,
    RewardPerHash,
    allocation_distance,
    cost_adjusted_reward,
    equilibrium_allocation,
    equilibrium_scales,
    pos_cost_per_round,
    regularize_hash_rate,
    relative_security,
    reward_per_hash,
    rest_reward_vector,
)
from .errors import DomainError, InputDataError, PreconditionError
from .sim import ScenarioConfig, SimTrace, builtin_scenario, compiled_available, run

__version__ = "0.1.0"

__all__ = [
    "Allocation",
    "ChainSpec",
    "DomainError",
    "InputDataError",
    "MarketState",
    "PosChainSpec",
    "PreconditionError",
    "RewardPerHash",
    "ScenarioConfig",
    "SimTrace",
    "allocation_distance",
    "builtin_scenario",
    "compiled_available",
    "cost_adjusted_reward",
    "equilibrium_allocation",
    "equilibrium_scales",
    "pos_cost_per_round",
    "regularize_hash_rate",
    "relative_security",
    "reward_per_hash",
    "rest_reward_vector",
    "run",
    "__version__",
]
