"""Closed-form economics of deviating from the allocation equilibrium.

Covers per-miner utility and opportunity cost, the cost of loyally boosting
one chain past its equilibrium share, the cost of diverting majority-chain
hash rate to reorganize the minority chain, and how issuance changes move
the equilibrium itself.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Sequence

from .econ import Allocation, RewardPerHash
from .errors import DomainError, PreconditionError

log = logging.getLogger(__name__)

SCALE_CONSTRAINT_TOL = 1e-9


@dataclass(frozen=True)
class AttackScenario:
    """Majority-chain miners diverting hash rate to reorganize chain B.

    ``alpha`` is the price ratio P_B/P_A. The attackers control weight
    ``(beta + gamma) * alpha / (1 + alpha)`` of the total: ``gamma`` times
    the equilibrium chain-B rate goes to the attack fork while ``beta``
    times stays on chain A. ``reorg_depth`` is the number of blocks to
    orphan; costs are quoted per block.
    """

    alpha: float
    beta: float
    gamma: float
    coins_per_block: float
    price_a: float
    price_b: float
    reorg_depth: int = 1

    def __post_init__(self) -> None:
        if self.alpha <= 0:
            raise DomainError("alpha must be positive")
        if self.gamma <= 1:
            raise DomainError("gamma must exceed 1 (attacker must outpace chain B)")
        if self.beta < 0:
            raise DomainError("beta must be non-negative")
        if self.beta + self.gamma >= 1.0 / self.alpha:
            raise DomainError("beta + gamma must stay below 1/alpha")
        if self.coins_per_block < 0 or self.price_a < 0 or self.price_b < 0:
            raise DomainError("coins and prices must be non-negative")
        if self.reorg_depth < 1:
            raise DomainError("reorg_depth must be at least 1")


@dataclass(frozen=True)
class IssuancePlan:
    """A minority chain raising its per-block issuance by factor k.

    ``beta`` and ``gamma`` are the cumulative issuance growth factors of
    chains A and B over the plan horizon; ``market_cap_b`` and
    ``issued_coins`` feed the price-dilution estimate.
    """

    alpha: float
    k: float
    beta: float
    gamma: float
    market_cap_b: float
    issued_coins: float

    def __post_init__(self) -> None:
        if self.alpha <= 0:
            raise DomainError("alpha must be positive")
        if self.k <= 1:
            raise DomainError("k must exceed 1")
        if not self.gamma > self.beta > 1:
            raise DomainError("need gamma > beta > 1")
        if self.market_cap_b < 0 or self.issued_coins <= 0:
            raise DomainError("market cap must be non-negative and issuance positive")


def utility_vector(phi: Sequence[float], rewards: RewardPerHash,
                   total_rate: float) -> tuple[float, float]:
    """Fiat earned per second on each chain by a miner holding fractions
    ``phi`` of the total hash rate: componentwise H * phi * reward."""
    phi_a, phi_b = phi
    if phi_a < 0 or phi_b < 0:
        raise DomainError("per-miner fractions must be non-negative")
    if phi_a + phi_b > 1.0 + 1e-12:
        raise DomainError("per-miner fractions cannot exceed the whole hash rate")
    if total_rate <= 0:
        raise DomainError("total hash rate must be positive")
    return total_rate * phi_a * rewards.chain_a, total_rate * phi_b * rewards.chain_b


def opportunity_cost(phi: Sequence[float], rewards: RewardPerHash,
                     phi_alt: Sequence[float], rewards_alt: RewardPerHash,
                     total_rate: float) -> tuple[float, float]:
    """Per-chain utility forgone by moving from ``phi`` (under ``rewards``)
    to ``phi_alt`` (under ``rewards_alt``)."""
    base = utility_vector(phi, rewards, total_rate)
    alt = utility_vector(phi_alt, rewards_alt, total_rate)
    return base[0] - alt[0], base[1] - alt[1]


def similar_chain_deviation_cost(phi_prime: Sequence[float], x_prime: float,
                                 y_prime: float, coins_per_block: float,
                                 price_a: float, price_b: float,
                                 target_time_s: float, phi_total: float) -> float:
    """Per-block opportunity cost of mining at a non-equilibrium allocation
    when the chains share block time, hash algorithm, and issuance.

    The deviating miners hold total fraction ``phi_total`` split as
    ``phi_prime`` while the aggregate sits at scales (x', y'); against the
    equilibrium baseline the cost per block is

        c * (P_A + P_B) * (phi_total - phi'_A/x' - phi'_B/y').
    """
    if target_time_s <= 0:
        raise DomainError("target block time must be positive")
    if coins_per_block < 0 or price_a < 0 or price_b < 0:
        raise DomainError("coins and prices must be non-negative")
    phi_a, phi_b = phi_prime
    if phi_a < 0 or phi_b < 0 or phi_total < 0:
        raise DomainError("allocation fractions must be non-negative")
    total_price = price_a + price_b
    if total_price <= 0:
        raise DomainError("combined price must be positive")
    rel = price_a / total_price
    constraint = x_prime * rel + y_prime * (1.0 - rel)
    if abs(constraint - 1.0) > SCALE_CONSTRAINT_TOL:
        raise PreconditionError(
            f"x'*R + y'*(1-R) must equal 1, got {constraint!r}")
    term_a = phi_a / x_prime if phi_a != 0 else 0.0
    term_b = phi_b / y_prime if phi_b != 0 else 0.0
    return coins_per_block * total_price * (phi_total - term_a - term_b)


def loyal_boost_cost(k: float, coins_per_block: float, price_b: float) -> float:
    """Per-block cost for loyal miners holding chain B at k times its
    equilibrium share: (k - 1) coinbase values of chain B."""
    if k < 1:
        raise DomainError("k must be at least 1")
    if coins_per_block < 0 or price_b < 0:
        raise DomainError("coins and prices must be non-negative")
    return coins_per_block * (k - 1.0) * price_b


def reorg_attack_cost(scenario: AttackScenario) -> tuple[float, Allocation]:
    """Per-block opportunity cost of the reorganization attack, and the
    aggregate allocation that holds while the attack runs.

    With a = alpha, the cost per block is
    c*(P_A+P_B) * (a*(beta+gamma) - a*beta/((1+a)*(1-a*gamma)) - a/(1+a))
    and the during-attack allocation is (1 - a*gamma, a*gamma).
    """
    a = scenario.alpha
    if a * scenario.gamma >= 1.0:
        raise DomainError("alpha * gamma must stay below 1 (attack exceeds total)")
    shifted = a * (scenario.beta + scenario.gamma)
    retained = a * scenario.beta / ((1.0 + a) * (1.0 - a * scenario.gamma))
    baseline = a / (1.0 + a)
    cost = (scenario.coins_per_block * (scenario.price_a + scenario.price_b)
            * (shifted - retained - baseline))
    during = Allocation(1.0 - a * scenario.gamma, a * scenario.gamma)
    return cost, during


def attack_cost_curve(alpha: float, coins_per_block: float, price_a: float,
                      price_b: float, budgets: Iterable[float],
                      gammas: Iterable[float]) -> list[tuple[float, float, float, float]]:
    """Tabulate attack costs over (budget, gamma) grid points.

    Each row is (budget, gamma, beta, cost_per_block) with beta = budget -
    gamma. Grid points violating the scenario constraints are skipped with
    a warning. Along a fixed budget the cost is lowest as gamma approaches
    1: slower reorganizations are cheaper.
    """
    gammas = list(gammas)
    rows = []
    for budget in budgets:
        for gamma in gammas:
            beta = budget - gamma
            try:
                scenario = AttackScenario(alpha=alpha, beta=beta, gamma=gamma,
                                          coins_per_block=coins_per_block,
                                          price_a=price_a, price_b=price_b)
                cost, _ = reorg_attack_cost(scenario)
            except DomainError as exc:
                log.warning("skipping budget=%g gamma=%g: %s", budget, gamma, exc)
                continue
            rows.append((budget, gamma, beta, cost))
    return rows


def issuance_price_impact(market_cap: float, issued_coins: float,
                          delta_coins: float) -> float:
    """Price change from issuing ``delta_coins`` more at constant market
    cap: -P * delta / (issued + delta), never positive."""
    if issued_coins <= 0:
        raise DomainError("issued_coins must be positive")
    if delta_coins < 0:
        raise DomainError("delta_coins must be non-negative")
    if market_cap < 0:
        raise DomainError("market_cap must be non-negative")
    price = market_cap / issued_coins
    return -price * delta_coins / (issued_coins + delta_coins)


def issuance_equilibrium(k: float, alpha: float, beta: float, gamma: float) -> Allocation:
    """Equilibrium allocation after chain B scales issuance by k.

    With cumulative issuance growth beta (chain A) and gamma (chain B)
    diluting prices, the split becomes
    (1 / (1 + k*alpha*beta/gamma), alpha / (alpha + gamma/(k*beta))).
    Chain B gains share precisely when gamma/(k*beta) < 1. k = 1 with
    beta = gamma recovers the pre-change equilibrium.
    """
    if alpha <= 0:
        raise DomainError("alpha must be positive")
    if k < 1:
        raise DomainError("k must be at least 1")
    if not (gamma >= beta >= 1):
        raise DomainError("need gamma >= beta >= 1")
    share_a = 1.0 / (1.0 + k * alpha * beta / gamma)
    share_b = alpha / (alpha + gamma / (k * beta))
    return Allocation(share_a, share_b)


def issuance_report(plan: IssuancePlan) -> dict[str, float]:
    """Price dilution and equilibrium shift implied by an issuance plan."""
    delta = (plan.gamma - 1.0) * plan.issued_coins
    shifted = issuance_equilibrium(plan.k, plan.alpha, plan.beta, plan.gamma)
    baseline = 1.0 / (1.0 + plan.alpha)
    return {
        "delta_price_b": issuance_price_impact(plan.market_cap_b,
                                               plan.issued_coins, delta),
        "share_b_before": 1.0 - baseline,
        "share_b_after": shifted.share_b,
    }
