"""Closed-form economics of splitting hash rate between two chains.

Everything in this module is a pure function of prices, block times, and
hash rates: conversion of native hash rates into a common unit through a
hash market, relative security, the fiat reward earned per hash, the unique
equilibrium split implied by relative coinbase value, and the staking
analogue where hashes are replaced by opportunity cost.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DomainError, PreconditionError

# Aggregate allocations must sit on the unit simplex to this tolerance.
ALLOCATION_SUM_TOL = 1e-12
# Callers supply the (x, y) scaling pair of a rest-state allocation; the
# defining constraint is checked to this relative tolerance.
SCALE_CONSTRAINT_TOL = 1e-9


@dataclass(frozen=True)
class ChainSpec:
    """Static parameters of one proof-of-work chain.

    ``spot_hash_price`` is the number of hashes per second of this chain's
    algorithm that one fiat unit buys on a hash market; it is the exchange
    rate used to express foreign hash rates in a common unit.
    """

    target_block_time_s: float
    coins_per_block: float
    spot_hash_price: float = 1.0
    label: str = ""

    def __post_init__(self) -> None:
        if self.target_block_time_s <= 0:
            raise DomainError("target_block_time_s must be positive")
        if self.coins_per_block < 0:
            raise DomainError("coins_per_block must be non-negative")
        if self.spot_hash_price <= 0:
            raise DomainError("spot_hash_price must be positive")


@dataclass(frozen=True)
class MarketState:
    """Fiat coin prices for the two chains at one instant."""

    price_a: float
    price_b: float

    def __post_init__(self) -> None:
        if self.price_a < 0 or self.price_b < 0:
            raise DomainError("coin prices must be non-negative")

    def coinbase_values(self, chain_a: ChainSpec, chain_b: ChainSpec) -> tuple[float, float]:
        """Fiat value of one block's coinbase on each chain (fees excluded)."""
        return (chain_a.coins_per_block * self.price_a,
                chain_b.coins_per_block * self.price_b)

    def relative_reward(self, chain_a: ChainSpec, chain_b: ChainSpec) -> float:
        """Chain A's share of combined coinbase value, in [0, 1]."""
        value_a, value_b = self.coinbase_values(chain_a, chain_b)
        total = value_a + value_b
        if total <= 0:
            raise DomainError("combined coinbase value is zero")
        return value_a / total


@dataclass(frozen=True)
class Allocation:
    """Fractions of the total regularized hash rate on each chain.

    Aggregate allocations live on the unit simplex; per-miner fractions are
    handled as plain pairs elsewhere because they only need to sum to at
    most one.
    """

    share_a: float
    share_b: float

    def __post_init__(self) -> None:
        if self.share_a < 0 or self.share_b < 0:
            raise DomainError("allocation shares must be non-negative")
        if abs(self.share_a + self.share_b - 1.0) > ALLOCATION_SUM_TOL:
            raise DomainError(
                f"allocation shares must sum to 1 (got {self.share_a + self.share_b!r})")


@dataclass(frozen=True)
class RewardPerHash:
    """Expected fiat value earned per regularized hash on each chain."""

    chain_a: float
    chain_b: float

    def __post_init__(self) -> None:
        if self.chain_a < 0 or self.chain_b < 0:
            raise DomainError("per-hash rewards must be non-negative")


@dataclass(frozen=True)
class PosChainSpec:
    """Parameters of a proof-of-stake chain for cost comparisons.

    ``risk_free_rate_per_s`` is the return of the reference risk-free asset
    per fiat unit per second; it prices the opportunity cost of locked stake.
    """

    staked_coins: float
    reward_per_round: float
    round_time_s: float
    coin_price: float
    risk_free_rate_per_s: float

    def __post_init__(self) -> None:
        if self.round_time_s <= 0:
            raise DomainError("round_time_s must be positive")
        for name in ("staked_coins", "reward_per_round", "coin_price", "risk_free_rate_per_s"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be non-negative")


def regularize_hash_rate(native_rate: float, spot_a: float, spot_native: float) -> float:
    """Convert a native hash rate into chain-A hash units.

    A rate of ``native_rate`` hashes/s whose algorithm trades at
    ``spot_native`` hashes per fiat unit is worth ``native_rate * spot_a /
    spot_native`` chain-A hashes/s. Identity when both spot prices agree.
    """
    if spot_a <= 0 or spot_native <= 0:
        raise DomainError("spot hash prices must be positive")
    if native_rate < 0:
        raise DomainError("hash rate must be non-negative")
    return native_rate * spot_a / spot_native


def relative_security(rate_a: float, rate_b: float) -> tuple[float, float]:
    """Each chain's fraction of the combined regularized hash rate."""
    if rate_a < 0 or rate_b < 0:
        raise DomainError("hash rates must be non-negative")
    total = rate_a + rate_b
    if total <= 0:
        raise DomainError("at least one hash rate must be positive")
    return rate_a / total, rate_b / total


def reward_per_hash(coinbase_value: float, inter_block_time_s: float, hash_rate: float) -> float:
    """Fiat earned per hash: coinbase value over (block time x hash rate)."""
    if inter_block_time_s <= 0:
        raise DomainError("inter-block time must be positive")
    if hash_rate <= 0:
        raise DomainError("hash rate must be positive")
    if coinbase_value < 0:
        raise DomainError("coinbase value must be non-negative")
    return coinbase_value / (inter_block_time_s * hash_rate)


def rest_reward_vector(value_a: float, value_b: float, total_rate: float,
                       t_a: float, t_b: float, x: float, y: float) -> RewardPerHash:
    """Per-hash rewards when both chains produce blocks at their targets.

    The allocation is parameterized as ``(x*R, y*(1-R))`` with R the relative
    reward; under at-target block production the reward vector collapses to

        ((V_A + V_B) / H) * (1/(x*T_A), 1/(y*T_B)).

    Raises if the scaling pair does not satisfy ``x*R + y*(1-R) = 1`` or if a
    scale is zero (that chain would hold no hash rate, so its per-hash reward
    is unbounded rather than infinite).
    """
    if t_a <= 0 or t_b <= 0:
        raise DomainError("target block times must be positive")
    if total_rate <= 0:
        raise DomainError("total hash rate must be positive")
    if x < 0 or y < 0:
        raise DomainError("allocation scales must be non-negative")
    total_value = value_a + value_b
    if total_value <= 0:
        raise DomainError("combined coinbase value must be positive")
    rel = value_a / total_value
    constraint = x * rel + y * (1.0 - rel)
    if abs(constraint - 1.0) > SCALE_CONSTRAINT_TOL:
        raise PreconditionError(
            f"x*R + y*(1-R) must equal 1, got {constraint!r}")
    if x == 0 or y == 0:
        raise DomainError("zero-weight chain has no finite per-hash reward")
    scale = total_value / total_rate
    return RewardPerHash(scale / (x * t_a), scale / (y * t_b))


def equilibrium_allocation(t_a: float, t_b: float, relative_reward: float) -> Allocation:
    """The unique split at which both chains pay the same per-hash reward.

    Closed form: ``(T_B*R, T_A*(1-R))`` normalized by ``T_B*R + T_A*(1-R)``.
    Equal block times reduce it to ``(R, 1-R)`` exactly.
    """
    if t_a <= 0 or t_b <= 0:
        raise DomainError("target block times must be positive")
    if not 0.0 <= relative_reward <= 1.0:
        raise DomainError("relative reward must lie in [0, 1]")
    if t_a == t_b:
        return Allocation(relative_reward, 1.0 - relative_reward)
    num_a = t_b * relative_reward
    num_b = t_a * (1.0 - relative_reward)
    denom = num_a + num_b
    return Allocation(num_a / denom, num_b / denom)


def equilibrium_scales(t_a: float, t_b: float, relative_reward: float) -> tuple[float, float]:
    """The (x, y) pair that puts ``rest_reward_vector`` at its fixed point.

    Useful for tests and deviation-cost setups: both reward components are
    equal exactly when ``x*T_A == y*T_B``.
    """
    if t_a <= 0 or t_b <= 0:
        raise DomainError("target block times must be positive")
    if not 0.0 <= relative_reward <= 1.0:
        raise DomainError("relative reward must lie in [0, 1]")
    denom = t_b * relative_reward + t_a * (1.0 - relative_reward)
    return t_b / denom, t_a / denom


def allocation_distance(first: Allocation, second: Allocation) -> float:
    """L1 distance between two allocations."""
    return abs(first.share_a - second.share_a) + abs(first.share_b - second.share_b)


def pos_cost_per_round(spec: PosChainSpec) -> float:
    """Fiat opportunity cost of the locked stake over one validation round.

    Stake worth ``k * P`` fiat could instead earn the risk-free rate for
    ``T`` seconds: ``r * k * T * P``.
    """
    return (spec.risk_free_rate_per_s * spec.staked_coins
            * spec.round_time_s * spec.coin_price)


def cost_adjusted_reward(reward_value: float, cost: float) -> float:
    """Fiat reward per fiat unit of opportunity cost.

    The staking counterpart of the per-hash reward; with cost denominated in
    fiat the spot conversion is the identity, so this composes directly with
    ``relative_security`` for security comparisons across consensus styles.
    """
    if cost <= 0:
        raise DomainError("cost must be positive")
    if reward_value < 0:
        raise DomainError("reward value must be non-negative")
    return reward_value / cost
