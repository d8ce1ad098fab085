"""Historical price/difficulty ingestion and actual-vs-equilibrium comparison.

Input CSVs carry their own cadences (hourly prices, per-block difficulty);
``join_history`` resamples both onto a common grid by carrying the last
observation forward, converting difficulty to hash rate on the way. The
comparison then puts the observed hash-rate split next to the equilibrium
implied by prices alone and flags rows where they disagree sharply.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

from .econ import equilibrium_allocation
from .errors import InputDataError
from .oracle import hash_rate_from_difficulty

DEFAULT_FLAG_THRESHOLD = 0.05


@dataclass(frozen=True)
class HistoryRow:
    """Joined market and hash-rate observations at one instant."""

    timestamp_s: float
    price_a: float
    price_b: float
    hash_rate_a: float
    hash_rate_b: float


@dataclass(frozen=True)
class ComparisonRow:
    """Observed allocation against the price-implied equilibrium."""

    timestamp_s: float
    share_a_actual: float
    share_a_equilibrium: float
    deviation: float
    flagged: bool


def _read_table(path: str, n_values: int, what: str) -> list[tuple[float, ...]]:
    rows: list[tuple[float, ...]] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for lineno, raw in enumerate(reader, start=1):
            if not raw or raw[0].lstrip().startswith("#"):
                continue
            if lineno == 1 and not _is_number(raw[0]):
                continue  # header line
            if len(raw) != n_values + 1:
                raise InputDataError(
                    f"{path}: row {lineno}: expected {n_values + 1} fields, got {len(raw)}")
            try:
                values = tuple(float(x) for x in raw)
            except ValueError as exc:
                raise InputDataError(f"{path}: row {lineno}: {exc}") from exc
            if any(not math.isfinite(v) or v <= 0 for v in values[1:]):
                raise InputDataError(
                    f"{path}: row {lineno}: {what} values must be positive and finite")
            if rows and values[0] <= rows[-1][0]:
                raise InputDataError(
                    f"{path}: row {lineno}: timestamps must be strictly increasing")
            rows.append(values)
    if not rows:
        raise InputDataError(f"{path}: no data rows")
    return rows


def _is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def read_price_csv(path: str) -> list[tuple[float, float, float]]:
    """Rows of (timestamp, price_A, price_B); optional header line."""
    return _read_table(path, 2, "price")


def read_difficulty_csv(path: str) -> list[tuple[float, float, float]]:
    """Rows of (timestamp, difficulty_A, difficulty_B); optional header."""
    return _read_table(path, 2, "difficulty")


def join_history(prices: list[tuple[float, float, float]],
                 difficulties: list[tuple[float, float, float]],
                 cadence_s: float, t_a: float = 600.0,
                 t_b: float = 600.0) -> list[HistoryRow]:
    """Resample both series onto a shared grid (last observation carried
    forward) over their overlapping time range.

    Difficulties become hash rates through the chain's target block time.
    The grid starts at the first multiple of ``cadence_s`` inside the
    overlap, so already-aligned inputs pass through unchanged.
    """
    if cadence_s <= 0:
        raise InputDataError("cadence must be positive")
    start = max(prices[0][0], difficulties[0][0])
    end = min(prices[-1][0], difficulties[-1][0])
    if start > end:
        raise InputDataError("price and difficulty ranges do not overlap")
    first_tick = math.ceil(start / cadence_s) * cadence_s
    if first_tick > end:
        raise InputDataError("no grid point inside the overlapping range")

    rows = []
    pi = di = 0
    tick = first_tick
    while tick <= end:
        while pi + 1 < len(prices) and prices[pi + 1][0] <= tick:
            pi += 1
        while di + 1 < len(difficulties) and difficulties[di + 1][0] <= tick:
            di += 1
        _, price_a, price_b = prices[pi]
        _, diff_a, diff_b = difficulties[di]
        rows.append(HistoryRow(
            timestamp_s=tick,
            price_a=price_a,
            price_b=price_b,
            hash_rate_a=hash_rate_from_difficulty(diff_a, t_a),
            hash_rate_b=hash_rate_from_difficulty(diff_b, t_b),
        ))
        tick += cadence_s
    return rows


def compare_allocation(rows: list[HistoryRow], t_a: float, t_b: float,
                       coins_a: float, coins_b: float,
                       flag_threshold: float = DEFAULT_FLAG_THRESHOLD) -> list[ComparisonRow]:
    """Observed hash-rate split vs the equilibrium implied by prices.

    Rows whose absolute deviation exceeds ``flag_threshold`` are flagged;
    sustained flags line up with regime events (forks, halts, price gaps)
    rather than tracking noise.
    """
    out = []
    for row in rows:
        total = row.hash_rate_a + row.hash_rate_b
        actual = row.hash_rate_a / total
        value_a = coins_a * row.price_a
        value_b = coins_b * row.price_b
        rel = value_a / (value_a + value_b)
        eq = equilibrium_allocation(t_a, t_b, rel).share_a
        dev = abs(actual - eq)
        out.append(ComparisonRow(
            timestamp_s=row.timestamp_s,
            share_a_actual=actual,
            share_a_equilibrium=eq,
            deviation=dev,
            flagged=dev > flag_threshold,
        ))
    return out


def write_comparison_csv(path_or_handle, rows: list[ComparisonRow]) -> None:
    header = "timestamp_s,w_A_actual,w_eA,deviation,flagged\n"
    def emit(fh):
        fh.write(header)
        for r in rows:
            fh.write(f"{r.timestamp_s:.12g},{r.share_a_actual:.12g},"
                     f"{r.share_a_equilibrium:.12g},{r.deviation:.12g},"
                     f"{1 if r.flagged else 0}\n")
    if isinstance(path_or_handle, str):
        with open(path_or_handle, "w") as fh:
            emit(fh)
    else:
        emit(path_or_handle)
