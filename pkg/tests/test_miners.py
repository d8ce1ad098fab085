import math
from dataclasses import replace

import numpy as np
import pytest

from hashalloc.econ import (
    Allocation,
    RewardPerHash,
    allocation_distance,
    equilibrium_allocation,
    rest_reward_vector,
)
from hashalloc.errors import DomainError
from hashalloc.miners import (
    EPS_GREEDY,
    EXTREME_GREEDY,
    MinerPopulation,
    aggregate_allocation,
    eps_greedy_step,
    extreme_greedy_step,
    greedy_choice,
    policy_step,
    split_after_step,
)


def rest_state(rng, *, rel_range=(0.3, 0.7), loyal_max=0.1, ensure_gap=1e-4):
    """Random at-rest configuration: equilibrium, loyal weights below their
    equilibrium shares, and observed rewards consistent with the current
    (off-equilibrium) allocation under on-target block production."""
    t_a = rng.uniform(60.0, 6000.0)
    t_b = rng.uniform(60.0, 6000.0)
    rel = rng.uniform(*rel_range)
    w_e = equilibrium_allocation(t_a, t_b, rel)
    loyal_a = rng.uniform(0.0, min(loyal_max, 0.9 * w_e.share_a))
    loyal_b = rng.uniform(0.0, min(loyal_max, 0.9 * w_e.share_b))
    nonloyal = 1.0 - loyal_a - loyal_b
    split = rng.uniform(0.0, 1.0)
    population = MinerPopulation(loyal_a, loyal_b, nonloyal, EPS_GREEDY,
                                 epsilon=1e-3, nonloyal_split=split)
    w = aggregate_allocation(population)
    if abs(w.share_a - w_e.share_a) < ensure_gap:
        return None
    total_value = rng.uniform(10.0, 1e6)
    rate = rng.uniform(1e3, 1e21)
    rewards = rest_reward_vector(rel * total_value, (1.0 - rel) * total_value,
                                 rate, t_a, t_b,
                                 w.share_a / rel, w.share_b / (1.0 - rel))
    return population, rewards, w, w_e


class TestGreedyChoice:
    def test_prefers_larger_component(self):
        assert greedy_choice(RewardPerHash(2.0, 1.0)) == "A"
        assert greedy_choice(RewardPerHash(1.0, 2.0)) == "B"

    def test_homogeneous_vector_has_no_choice(self):
        assert greedy_choice(RewardPerHash(3.7, 3.7)) is None

    def test_tie_tolerance_is_relative(self):
        assert greedy_choice(RewardPerHash(1.0, 1.0 + 1e-13)) is None
        assert greedy_choice(RewardPerHash(1.0, 1.0 + 1e-9)) == "B"

    def test_overallocated_chain_pays_less(self):
        # Allocation (0.9, 0.1) against a 3:1 value split: chain B pays more.
        rewards = rest_reward_vector(300.0, 100.0, 1.0, 600.0, 600.0, 1.2, 0.4)
        assert greedy_choice(rewards) == "B"

    def test_nan_rejected(self):
        with pytest.raises(DomainError):
            greedy_choice(RewardPerHash(math.nan, 1.0))

    def test_infinite_component_wins(self):
        assert greedy_choice(RewardPerHash(math.inf, 5.0)) == "A"
        assert greedy_choice(RewardPerHash(math.inf, math.inf)) is None


class TestEpsGreedyStep:
    def test_moves_half_epsilon_per_component(self):
        population = MinerPopulation(0.0, 0.0, 1.0, EPS_GREEDY, 0.1,
                                     nonloyal_split=0.4)
        stepped = eps_greedy_step(population, RewardPerHash(2.0, 1.0))
        w = aggregate_allocation(stepped)
        assert w.share_a == pytest.approx(0.45, abs=1e-15)
        assert w.share_b == pytest.approx(0.55, abs=1e-15)

    def test_clamps_at_full_split(self):
        population = MinerPopulation(0.1, 0.1, 0.8, EPS_GREEDY, 0.1,
                                     nonloyal_split=1.0)
        assert eps_greedy_step(population, RewardPerHash(2.0, 1.0)) == population

    def test_no_move_on_homogeneous_rewards(self):
        population = MinerPopulation(0.05, 0.05, 0.9, EPS_GREEDY, 0.01,
                                     nonloyal_split=0.5)
        assert eps_greedy_step(population, RewardPerHash(1.0, 1.0)) == population

    def test_loyal_weights_never_move(self):
        population = MinerPopulation(0.2, 0.3, 0.5, EPS_GREEDY, 0.05,
                                     nonloyal_split=0.5)
        stepped = eps_greedy_step(population, RewardPerHash(1.0, 5.0))
        assert stepped.loyal_a == 0.2
        assert stepped.loyal_b == 0.3


class TestExtremeGreedyStep:
    def test_all_weight_to_better_chain(self):
        population = MinerPopulation(0.05, 0.05, 0.9, EXTREME_GREEDY,
                                     nonloyal_split=0.5)
        w = aggregate_allocation(extreme_greedy_step(population,
                                                     RewardPerHash(2.0, 1.0)))
        assert w.share_a == pytest.approx(0.95, abs=1e-15)
        assert w.share_b == pytest.approx(0.05, abs=1e-15)
        w = aggregate_allocation(extreme_greedy_step(population,
                                                     RewardPerHash(1.0, 2.0)))
        assert w.share_a == pytest.approx(0.05, abs=1e-15)
        assert w.share_b == pytest.approx(0.95, abs=1e-15)

    def test_homogeneous_rewards_hold_position(self):
        population = MinerPopulation(0.05, 0.05, 0.9, EXTREME_GREEDY,
                                     nonloyal_split=0.3)
        assert extreme_greedy_step(population, RewardPerHash(2.0, 2.0)) == population


class TestAggregateAllocation:
    def test_even_split(self):
        population = MinerPopulation(0.05, 0.05, 0.9, EPS_GREEDY, 1e-3, 0.5)
        w = aggregate_allocation(population)
        assert w == Allocation(0.5, 0.5)

    def test_full_split(self):
        population = MinerPopulation(0.05, 0.05, 0.9, EPS_GREEDY, 1e-3, 1.0)
        w = aggregate_allocation(population)
        assert w.share_a == pytest.approx(0.95, abs=1e-15)
        assert w.share_b == pytest.approx(0.05, abs=1e-15)

    def test_equilibrium_split_without_loyal_mass(self):
        population = MinerPopulation(0.0, 0.0, 1.0, EPS_GREEDY, 1e-3, 0.9653)
        w = aggregate_allocation(population)
        assert w.share_a == pytest.approx(0.9653, abs=1e-15)

    def test_population_validation(self):
        with pytest.raises(DomainError):
            MinerPopulation(0.5, 0.6, 0.2, EPS_GREEDY, 1e-3)
        with pytest.raises(DomainError):
            MinerPopulation(0.05, 0.05, 0.9, EPS_GREEDY, 0.0)
        with pytest.raises(DomainError):
            MinerPopulation(0.05, 0.05, 0.9, "grabby", 1e-3)


class TestConvergenceMicroProperties:
    """Single-step geometry around the equilibrium under at-rest rewards."""

    N_STATES = 1000  # the acceptance suite reruns these at 1e4 draws

    def test_direction_matches_equilibrium_side(self):
        rng = np.random.default_rng(7)
        checked = 0
        while checked < self.N_STATES:
            state = rest_state(rng)
            if state is None:
                continue
            population, rewards, w, w_e = state
            choice = greedy_choice(rewards)
            assert choice == ("A" if w.share_a < w_e.share_a else "B")
            checked += 1

    def test_small_step_contracts_by_exactly_epsilon(self):
        rng = np.random.default_rng(8)
        checked = 0
        while checked < self.N_STATES:
            state = rest_state(rng)
            if state is None:
                continue
            population, rewards, w, w_e = state
            distance = allocation_distance(w, w_e)
            epsilon = rng.uniform(0.05, 0.95) * distance
            population = replace(population, epsilon=epsilon)
            stepped = eps_greedy_step(population, rewards)
            new_distance = allocation_distance(aggregate_allocation(stepped), w_e)
            assert (distance - new_distance) == pytest.approx(epsilon, abs=1e-12)
            checked += 1

    def test_overshooting_step_diverges_by_exactly_epsilon(self):
        rng = np.random.default_rng(9)
        checked = 0
        while checked < self.N_STATES:
            state = rest_state(rng, rel_range=(0.4, 0.6), loyal_max=0.05)
            if state is None:
                continue
            population, rewards, w, w_e = state
            delta = allocation_distance(w, w_e)
            if delta > 0.2:
                continue
            epsilon = rng.uniform(1e-4, 0.02)
            # The unclamped overshoot target must stay inside the non-loyal
            # range or the clamp truncates the move.
            shift = (0.5 * (2.0 * delta + epsilon)) / population.nonloyal
            direction = 1.0 if w.share_a < w_e.share_a else -1.0
            target = population.nonloyal_split + direction * shift
            if not 0.0 <= target <= 1.0:
                continue
            population = replace(population, epsilon=2.0 * delta + epsilon)
            stepped = eps_greedy_step(population, rewards)
            new_distance = allocation_distance(aggregate_allocation(stepped), w_e)
            assert (new_distance - delta) == pytest.approx(epsilon, abs=1e-12)
            checked += 1

    def test_loyal_bounds_hold_under_any_step_sequence(self):
        rng = np.random.default_rng(10)
        population = MinerPopulation(0.07, 0.11, 0.82, EPS_GREEDY, 0.05, 0.5)
        for _ in range(2000):
            rewards = RewardPerHash(rng.uniform(0.0, 2.0), rng.uniform(0.0, 2.0))
            population = policy_step(population, rewards)
            w = aggregate_allocation(population)
            assert population.loyal_a - 1e-15 <= w.share_a <= 1.0 - population.loyal_b + 1e-15


class TestSplitAfterStep:
    """The engines inline this function; pin its semantics here."""

    def test_matches_eps_greedy_step(self):
        rng = np.random.default_rng(11)
        for _ in range(500):
            split = rng.uniform(0, 1)
            nonloyal = rng.uniform(0.1, 1.0)
            loyal_a = (1.0 - nonloyal) * rng.uniform(0, 1)
            loyal_b = 1.0 - nonloyal - loyal_a
            eps = rng.uniform(1e-4, 0.2)
            pi = RewardPerHash(rng.uniform(0, 2), rng.uniform(0, 2))
            population = MinerPopulation(loyal_a, loyal_b, nonloyal,
                                         EPS_GREEDY, eps, split)
            expect = eps_greedy_step(population, pi).nonloyal_split
            got = split_after_step(split, nonloyal, EPS_GREEDY, eps,
                                   pi.chain_a, pi.chain_b)
            assert got == expect

    def test_matches_extreme_step(self):
        rng = np.random.default_rng(12)
        for _ in range(200):
            split = rng.uniform(0, 1)
            pi = RewardPerHash(rng.uniform(0, 2), rng.uniform(0, 2))
            population = MinerPopulation(0.05, 0.05, 0.9, EXTREME_GREEDY,
                                         nonloyal_split=split)
            expect = extreme_greedy_step(population, pi).nonloyal_split
            got = split_after_step(split, 0.9, EXTREME_GREEDY, 0.0,
                                   pi.chain_a, pi.chain_b)
            assert got == expect
