"""Discrete-event simulation of block generation on two competing chains.

Each event is one block on either chain: the price ratio takes one random
walk step, the chains race exponentially at their current difficulties, the
winner's difficulty retargets, miners observe the per-hash rewards implied
by current difficulties and apply their policy, and a trace row is emitted.
Runs are deterministic per seed, and the trailing metrics quantify how the
realized allocation tracks (or oscillates around) the equilibrium.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, replace

import numpy as np

from . import _engine_py
from ._engine_py import EngineParams
from .difficulty import IDEAL, ROLLING_WINDOW, RetargetRule
from .econ import Allocation, ChainSpec, equilibrium_allocation
from .errors import DomainError, InputDataError
from .miners import EPS_GREEDY, EXTREME_GREEDY, MinerPopulation

try:
    from . import _kernel
except ImportError:
    _kernel = None

# Reflecting floor keeping the price-ratio walk positive.
PRICE_FLOOR = 1e-4

TRACE_COLUMNS = ("tau", "time_s", "chain", "height", "expected_hashes",
                 "dt_s", "w_A", "w_eA", "price_ratio", "pi_A", "pi_B")


def compiled_available() -> bool:
    return _kernel is not None


@dataclass(frozen=True)
class ScenarioConfig:
    """Full description of one simulation run."""

    chain_a: ChainSpec
    chain_b: ChainSpec
    rule_a: RetargetRule
    rule_b: RetargetRule
    population: MinerPopulation
    total_hash_rate: float
    price_a: float = 1.0
    initial_price_ratio: float = 0.5
    walk_sigma: float = 5e-3
    duration_days: float = 450.0
    warmup_days: float = 90.0
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.total_hash_rate <= 0:
            raise DomainError("total_hash_rate must be positive")
        if self.price_a <= 0:
            raise DomainError("price_a must be positive")
        if self.initial_price_ratio <= 0:
            raise DomainError("initial_price_ratio must be positive")
        if self.walk_sigma < 0:
            raise DomainError("walk_sigma must be non-negative")
        if not 0 <= self.warmup_days < self.duration_days:
            raise DomainError("need duration_days > warmup_days >= 0")


@dataclass
class SimTrace:
    """Columnar per-event record of one run.

    ``chain`` holds 0 for chain A and 1 for chain B; heights are per-chain.
    ``w_a`` is the aggregate allocation after the policy step at that event
    and ``w_e_a`` the equilibrium implied by prices at the same instant.
    """

    time_s: np.ndarray
    chain: np.ndarray
    height: np.ndarray
    expected_hashes: np.ndarray
    dt_s: np.ndarray
    w_a: np.ndarray
    w_e_a: np.ndarray
    price_ratio: np.ndarray
    pi_a: np.ndarray
    pi_b: np.ndarray

    def __len__(self) -> int:
        return self.time_s.shape[0]

    def write(self, fh) -> None:
        """Stream the documented CSV layout (12 significant digits)."""
        fh.write(",".join(TRACE_COLUMNS) + "\n")
        for i in range(len(self)):
            fh.write(
                f"{i},{self.time_s[i]:.12g},"
                f"{'A' if self.chain[i] == 0 else 'B'},"
                f"{self.height[i]},{self.expected_hashes[i]:.12g},"
                f"{self.dt_s[i]:.12g},{self.w_a[i]:.12g},"
                f"{self.w_e_a[i]:.12g},{self.price_ratio[i]:.12g},"
                f"{self.pi_a[i]:.12g},{self.pi_b[i]:.12g}\n")

    def write_csv(self, path: str) -> None:
        with open(path, "w", newline="") as fh:
            self.write(fh)

    @classmethod
    def read_csv(cls, path: str) -> "SimTrace":
        cols: dict[str, list] = {name: [] for name in TRACE_COLUMNS}
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or tuple(header) != TRACE_COLUMNS:
                raise InputDataError(f"{path}: unexpected trace header {header!r}")
            for lineno, row in enumerate(reader, start=2):
                if len(row) != len(TRACE_COLUMNS):
                    raise InputDataError(f"{path}: row {lineno} has {len(row)} fields")
                try:
                    for name, value in zip(TRACE_COLUMNS, row):
                        if name == "chain":
                            cols[name].append({"A": 0, "B": 1}[value])
                        elif name in ("tau", "height"):
                            cols[name].append(int(value))
                        else:
                            cols[name].append(float(value))
                except (ValueError, KeyError) as exc:
                    raise InputDataError(f"{path}: row {lineno}: {exc}") from exc
        return cls(
            time_s=np.array(cols["time_s"]),
            chain=np.array(cols["chain"], dtype=np.int8),
            height=np.array(cols["height"], dtype=np.int64),
            expected_hashes=np.array(cols["expected_hashes"]),
            dt_s=np.array(cols["dt_s"]),
            w_a=np.array(cols["w_A"]),
            w_e_a=np.array(cols["w_eA"]),
            price_ratio=np.array(cols["price_ratio"]),
            pi_a=np.array(cols["pi_A"]),
            pi_b=np.array(cols["pi_B"]),
        )


def price_step(ratio: float, sigma: float, rng: np.random.Generator,
               floor: float = PRICE_FLOOR) -> float:
    """One additive random-walk step of the price ratio, reflected at the
    positive floor. A zero sigma leaves the ratio unchanged (no draw)."""
    if ratio <= 0:
        raise DomainError("price ratio must be positive")
    if sigma < 0:
        raise DomainError("sigma must be non-negative")
    if sigma == 0.0:
        return ratio
    moved = ratio + sigma * rng.standard_normal()
    if moved < floor:
        moved = 2.0 * floor - moved
    return float(moved)


def sample_block_race(expected_a: float, expected_b: float, allocation: Allocation,
                      total_rate: float, rng: np.random.Generator) -> tuple[str, float]:
    """Race both chains for the next block.

    Solve times are exponential with rate (share x total rate) / expected
    hashes; a chain holding no hash rate never wins. Returns the winning
    chain label and the elapsed seconds.
    """
    if expected_a <= 0 or expected_b <= 0:
        raise DomainError("expected hashes must be positive")
    if total_rate <= 0:
        raise DomainError("total hash rate must be positive")
    rate_a = allocation.share_a * total_rate
    rate_b = allocation.share_b * total_rate
    dt_a = rng.standard_exponential() * expected_a / rate_a if rate_a > 0 else math.inf
    dt_b = rng.standard_exponential() * expected_b / rate_b if rate_b > 0 else math.inf
    if dt_a <= dt_b:
        return "A", float(dt_a)
    return "B", float(dt_b)


def _genesis_work(rule: RetargetRule, share: float, total_rate: float) -> float:
    if rule.genesis_expected_hashes is not None:
        return rule.genesis_expected_hashes
    base_rate = share * total_rate if share > 0 else total_rate
    return base_rate * rule.target_time_s


def _engine_params(config: ScenarioConfig) -> EngineParams:
    pop = config.population
    split0 = pop.nonloyal_split
    w_a0 = pop.loyal_a + pop.nonloyal * split0
    w_b0 = pop.loyal_b + pop.nonloyal * (1.0 - split0)
    duration_s = config.duration_days * 86400.0
    cap_hint = int(duration_s * (1.0 / config.rule_a.target_time_s
                                 + 1.0 / config.rule_b.target_time_s) * 1.25) + 4096
    return EngineParams(
        duration_s=duration_s,
        ratio0=config.initial_price_ratio,
        sigma=config.walk_sigma,
        price_floor=PRICE_FLOOR,
        value_a=config.chain_a.coins_per_block * config.price_a,
        value_b_coef=config.chain_b.coins_per_block * config.price_a,
        total_rate=config.total_hash_rate,
        t_a=config.rule_a.target_time_s,
        t_b=config.rule_b.target_time_s,
        kind_a=_engine_py.KIND_IDEAL if config.rule_a.kind == IDEAL else _engine_py.KIND_ROLLING,
        kind_b=_engine_py.KIND_IDEAL if config.rule_b.kind == IDEAL else _engine_py.KIND_ROLLING,
        window_a=config.rule_a.window_blocks,
        window_b=config.rule_b.window_blocks,
        genesis_a=_genesis_work(config.rule_a, w_a0, config.total_hash_rate),
        genesis_b=_genesis_work(config.rule_b, w_b0, config.total_hash_rate),
        loyal_a=pop.loyal_a,
        loyal_b=pop.loyal_b,
        nonloyal=pop.nonloyal,
        policy_kind=(_engine_py.POLICY_EXTREME if pop.policy == EXTREME_GREEDY
                     else _engine_py.POLICY_EPS),
        epsilon=pop.epsilon,
        split0=split0,
        cap_hint=cap_hint,
    )


def resolve_engine(engine: str = "auto") -> str:
    """Map an engine request to 'compiled' or 'python'.

    'auto' prefers the compiled kernel, honoring the HASHALLOC_ENGINE
    environment variable when set.
    """
    if engine == "auto":
        engine = os.environ.get("HASHALLOC_ENGINE", "auto")
    if engine == "auto":
        return "compiled" if compiled_available() else "python"
    if engine == "compiled":
        if not compiled_available():
            raise DomainError("compiled engine requested but not built")
        return "compiled"
    if engine == "python":
        return "python"
    raise DomainError(f"unknown engine {engine!r}")


def run(config: ScenarioConfig, engine: str = "auto") -> SimTrace:
    """Simulate one scenario; deterministic for a fixed (config, seed)."""
    params = _engine_params(config)
    bitgen = np.random.PCG64(config.rng_seed)
    if resolve_engine(engine) == "compiled":
        cols = _kernel.run_events(params, bitgen)
    else:
        cols = _engine_py.run_events(params, bitgen)
    return SimTrace(
        time_s=cols["time_s"], chain=cols["chain"], height=cols["height"],
        expected_hashes=cols["expected_hashes"], dt_s=cols["dt_s"],
        w_a=cols["w_a"], w_e_a=cols["w_e_a"], price_ratio=cols["price_ratio"],
        pi_a=cols["pi_a"], pi_b=cols["pi_b"])


def _post_warmup(trace: SimTrace, warmup_days: float) -> np.ndarray:
    if len(trace) == 0:
        raise DomainError("empty trace")
    mask = trace.time_s >= warmup_days * 86400.0
    if not mask.any():
        raise DomainError("no events after the warmup window")
    return mask


def convergence_metrics(trace: SimTrace, warmup_days: float,
                        within: float = 0.05) -> dict[str, float]:
    """Statistics of |w_B - w_eB| over post-warmup events."""
    mask = _post_warmup(trace, warmup_days)
    dev = np.abs(trace.w_e_a[mask] - trace.w_a[mask])
    return {
        "mean_abs_dev": float(dev.mean()),
        "max_abs_dev": float(dev.max()),
        "fraction_within": float((dev <= within).mean()),
    }


def oscillation_metrics(trace: SimTrace, warmup_days: float) -> dict[str, float]:
    """Amplitude and equilibrium-crossing statistics of chain B's share.

    The dominant period is twice the mean spacing between sign changes of
    (w_B - w_eB): one full swing crosses the equilibrium twice.
    """
    mask = _post_warmup(trace, warmup_days)
    w_b = 1.0 - trace.w_a[mask]
    w_e_b = 1.0 - trace.w_e_a[mask]
    diff = w_b - w_e_b
    signs = np.sign(diff)
    nz = np.nonzero(signs)[0]
    crossing_count = 0
    period = math.nan
    if nz.size >= 2:
        s = signs[nz]
        flips = s[1:] != s[:-1]
        crossing_count = int(flips.sum())
        if crossing_count >= 2:
            positions = nz[1:][flips]
            period = 2.0 * float(np.diff(positions).mean())
    return {
        "amplitude": float(w_b.max() - w_b.min()),
        "crossing_count": crossing_count,
        "dominant_period_events": period,
    }


# ---------------------------------------------------------------------------
# Scenario files and bundled scenarios

_SCENARIO_KEYS = {
    "chain_a.label", "chain_a.target_block_time_s", "chain_a.coins_per_block",
    "chain_a.spot_hash_price", "chain_a.rule", "chain_a.window_blocks",
    "chain_a.genesis_expected_hashes",
    "chain_b.label", "chain_b.target_block_time_s", "chain_b.coins_per_block",
    "chain_b.spot_hash_price", "chain_b.rule", "chain_b.window_blocks",
    "chain_b.genesis_expected_hashes",
    "population.loyal_a", "population.loyal_b", "population.policy",
    "population.epsilon", "population.initial_split",
    "total_hash_rate", "price_a", "initial_price_ratio", "walk_sigma",
    "duration_days", "warmup_days", "rng_seed",
}


def load_scenario(path: str) -> ScenarioConfig:
    """Parse a key = value scenario file (see README for the schema)."""
    values: dict[str, str] = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InputDataError(f"{path}: line {lineno}: expected key = value")
            key, _, val = line.partition("=")
            key, val = key.strip(), val.strip()
            if key not in _SCENARIO_KEYS:
                raise InputDataError(f"{path}: line {lineno}: unknown key {key!r}")
            if key in values:
                raise InputDataError(f"{path}: line {lineno}: duplicate key {key!r}")
            values[key] = val
    try:
        return _scenario_from_values(values)
    except (KeyError, ValueError) as exc:
        raise InputDataError(f"{path}: {exc}") from exc


def _scenario_from_values(values: dict[str, str]) -> ScenarioConfig:
    def get(key: str, default: str | None = None) -> str:
        if key in values:
            return values[key]
        if default is None:
            raise KeyError(f"missing required key {key!r}")
        return default

    def chain(prefix: str, default_label: str) -> tuple[ChainSpec, RetargetRule]:
        spec = ChainSpec(
            target_block_time_s=float(get(f"{prefix}.target_block_time_s")),
            coins_per_block=float(get(f"{prefix}.coins_per_block")),
            spot_hash_price=float(get(f"{prefix}.spot_hash_price", "1.0")),
            label=get(f"{prefix}.label", default_label),
        )
        genesis = values.get(f"{prefix}.genesis_expected_hashes")
        rule = RetargetRule(
            kind=get(f"{prefix}.rule", ROLLING_WINDOW),
            target_time_s=spec.target_block_time_s,
            window_blocks=int(get(f"{prefix}.window_blocks", "144")),
            genesis_expected_hashes=float(genesis) if genesis is not None else None,
        )
        return spec, rule

    chain_a, rule_a = chain("chain_a", "A")
    chain_b, rule_b = chain("chain_b", "B")
    loyal_a = float(get("population.loyal_a"))
    loyal_b = float(get("population.loyal_b"))
    nonloyal = 1.0 - loyal_a - loyal_b
    ratio0 = float(get("initial_price_ratio", "0.5"))
    price_a = float(get("price_a", "1.0"))
    split_raw = get("population.initial_split", "equilibrium")
    if split_raw == "equilibrium":
        split0 = _equilibrium_split(chain_a, chain_b, rule_a, rule_b,
                                    price_a, ratio0, loyal_a, loyal_b, nonloyal)
    else:
        split0 = float(split_raw)
    population = MinerPopulation(
        loyal_a=loyal_a, loyal_b=loyal_b, nonloyal=nonloyal,
        policy=get("population.policy"),
        epsilon=float(get("population.epsilon", "0")),
        nonloyal_split=split0,
    )
    return ScenarioConfig(
        chain_a=chain_a, chain_b=chain_b, rule_a=rule_a, rule_b=rule_b,
        population=population,
        total_hash_rate=float(get("total_hash_rate", "1e18")),
        price_a=price_a,
        initial_price_ratio=ratio0,
        walk_sigma=float(get("walk_sigma", "5e-3")),
        duration_days=float(get("duration_days", "450")),
        warmup_days=float(get("warmup_days", "90")),
        rng_seed=int(get("rng_seed", "0")),
    )


def _equilibrium_split(chain_a: ChainSpec, chain_b: ChainSpec,
                       rule_a: RetargetRule, rule_b: RetargetRule,
                       price_a: float, ratio: float,
                       loyal_a: float, loyal_b: float, nonloyal: float) -> float:
    value_a = chain_a.coins_per_block * price_a
    value_b = chain_b.coins_per_block * price_a * ratio
    rel = value_a / (value_a + value_b)
    w_e = equilibrium_allocation(rule_a.target_time_s, rule_b.target_time_s, rel)
    if nonloyal <= 0:
        return 0.5
    split = (w_e.share_a - loyal_a) / nonloyal
    return min(1.0, max(0.0, split))


def builtin_scenario(name: str, seed: int | None = None) -> ScenarioConfig:
    """Named scenarios used throughout the test suite.

    ``baseline_eps{1e-3,5e-3,1e-2}``: two identical chains (600 s target,
    12.5 coins, rolling window 144), price ratio starting at 0.5 with a
    5e-3 random walk, 5%/5% loyal weight, 90% cautious-greedy mass at the
    given step size, 450 simulated days with a 90-day warmup.

    ``extreme_w144`` / ``extreme_w36``: same chains but all non-loyal weight
    follows the extreme policy, with rolling windows 144 and 36; shorter
    180-day runs with a 30-day warmup.
    """
    if name not in BUILTIN_SCENARIOS:
        raise DomainError(
            f"unknown scenario {name!r}; available: {sorted(BUILTIN_SCENARIOS)}")
    policy, epsilon, window, duration, warmup = BUILTIN_SCENARIOS[name]
    chain_a = ChainSpec(600.0, 12.5, 1.0, "A")
    chain_b = ChainSpec(600.0, 12.5, 1.0, "B")
    rule_a = RetargetRule(ROLLING_WINDOW, 600.0, window)
    rule_b = RetargetRule(ROLLING_WINDOW, 600.0, window)
    ratio0 = 0.5
    split0 = _equilibrium_split(chain_a, chain_b, rule_a, rule_b,
                                1.0, ratio0, 0.05, 0.05, 0.9)
    population = MinerPopulation(0.05, 0.05, 0.9, policy, epsilon, split0)
    return ScenarioConfig(
        chain_a=chain_a, chain_b=chain_b, rule_a=rule_a, rule_b=rule_b,
        population=population, total_hash_rate=1e18,
        initial_price_ratio=ratio0, walk_sigma=5e-3,
        duration_days=duration, warmup_days=warmup,
        rng_seed=0 if seed is None else seed,
    )


BUILTIN_SCENARIOS = {
    # name: (policy, epsilon, window, duration_days, warmup_days)
    "baseline_eps1e-3": (EPS_GREEDY, 1e-3, 144, 450.0, 90.0),
    "baseline_eps5e-3": (EPS_GREEDY, 5e-3, 144, 450.0, 90.0),
    "baseline_eps1e-2": (EPS_GREEDY, 1e-2, 144, 450.0, 90.0),
    "extreme_w144": (EXTREME_GREEDY, 0.0, 144, 180.0, 30.0),
    "extreme_w36": (EXTREME_GREEDY, 0.0, 36, 180.0, 30.0),
}


def with_seed(config: ScenarioConfig, seed: int) -> ScenarioConfig:
    return replace(config, rng_seed=seed)
