"""Miner population state and per-block reallocation policies.

Non-loyal miners act as one aggregate mass with a single split fraction;
loyal weight never moves regardless of which chain pays better. Policies
update the split once per block event: the cautious policy shifts a fixed
small amount toward the better-paying chain, the extreme policy moves all
non-loyal weight at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .econ import Allocation, RewardPerHash
from .errors import DomainError

EPS_GREEDY = "eps_greedy"
EXTREME_GREEDY = "extreme_greedy"

# Per-hash rewards within this relative distance count as equal: there is
# no better-paying chain to move toward.
TIE_TOL = 1e-12

WEIGHT_SUM_TOL = 1e-12


@dataclass(frozen=True)
class MinerPopulation:
    """Hash-weight composition of the mining population.

    ``nonloyal_split`` is the fraction of non-loyal weight currently on
    chain A. ``epsilon`` is the total L1 step size of one cautious move and
    must be positive for the ``eps_greedy`` policy.
    """

    loyal_a: float
    loyal_b: float
    nonloyal: float
    policy: str
    epsilon: float = 0.0
    nonloyal_split: float = 0.5

    def __post_init__(self) -> None:
        if min(self.loyal_a, self.loyal_b, self.nonloyal) < 0:
            raise DomainError("population weights must be non-negative")
        if abs(self.loyal_a + self.loyal_b + self.nonloyal - 1.0) > WEIGHT_SUM_TOL:
            raise DomainError("population weights must sum to 1")
        if not 0.0 <= self.nonloyal_split <= 1.0:
            raise DomainError("nonloyal_split must lie in [0, 1]")
        if self.policy not in (EPS_GREEDY, EXTREME_GREEDY):
            raise DomainError(f"unknown policy {self.policy!r}")
        if self.policy == EPS_GREEDY and self.epsilon <= 0:
            raise DomainError("eps_greedy requires epsilon > 0")


def greedy_choice(rewards: RewardPerHash) -> str | None:
    """Which chain pays more per hash: 'A', 'B', or None on a tie."""
    a, b = rewards.chain_a, rewards.chain_b
    if math.isnan(a) or math.isnan(b):
        raise DomainError("per-hash rewards must not be NaN")
    if math.isinf(a) and math.isinf(b):
        return None
    if a > b:
        return "A" if not _tied(a, b) else None
    if b > a:
        return "B" if not _tied(a, b) else None
    return None


def _tied(a: float, b: float) -> bool:
    if math.isinf(a) or math.isinf(b):
        return False
    return abs(a - b) <= TIE_TOL * max(abs(a), abs(b))


def split_after_step(split: float, nonloyal: float, policy: str, epsilon: float,
                     reward_a: float, reward_b: float) -> float:
    """Non-loyal split after one policy step, given raw per-hash rewards.

    This is the single source of truth for the step arithmetic; the
    simulation engines apply exactly this function (the compiled engine
    replays the same expressions and is held to bit parity by tests).
    """
    if reward_a > reward_b and not _tied(reward_a, reward_b):
        choice = 1.0
    elif reward_b > reward_a and not _tied(reward_a, reward_b):
        choice = -1.0
    else:
        return split
    if policy == EXTREME_GREEDY:
        return 1.0 if choice > 0 else 0.0
    if nonloyal <= 0:
        return split
    shift = 0.5 * epsilon / nonloyal
    if choice > 0:
        moved = split + shift
        return 1.0 if moved > 1.0 else moved
    moved = split - shift
    return 0.0 if moved < 0.0 else moved


def eps_greedy_step(population: MinerPopulation, rewards: RewardPerHash) -> MinerPopulation:
    """Shift epsilon/2 of total weight within the non-loyal mass toward the
    better-paying chain, clamped so the split stays in [0, 1]."""
    greedy_choice(rewards)  # NaN guard
    split = split_after_step(population.nonloyal_split, population.nonloyal,
                             EPS_GREEDY, population.epsilon,
                             rewards.chain_a, rewards.chain_b)
    if split == population.nonloyal_split:
        return population
    return replace(population, nonloyal_split=split)


def extreme_greedy_step(population: MinerPopulation, rewards: RewardPerHash) -> MinerPopulation:
    """Move all non-loyal weight onto the better-paying chain."""
    greedy_choice(rewards)
    split = split_after_step(population.nonloyal_split, population.nonloyal,
                             EXTREME_GREEDY, 0.0,
                             rewards.chain_a, rewards.chain_b)
    if split == population.nonloyal_split:
        return population
    return replace(population, nonloyal_split=split)


def policy_step(population: MinerPopulation, rewards: RewardPerHash) -> MinerPopulation:
    """Apply the population's configured policy for one block event."""
    if population.policy == EXTREME_GREEDY:
        return extreme_greedy_step(population, rewards)
    return eps_greedy_step(population, rewards)


def aggregate_allocation(population: MinerPopulation) -> Allocation:
    """Total allocation: loyal weight plus the split non-loyal mass."""
    share_a = population.loyal_a + population.nonloyal * population.nonloyal_split
    share_b = population.loyal_b + population.nonloyal * (1.0 - population.nonloyal_split)
    return Allocation(share_a, share_b)
