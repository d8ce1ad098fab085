"""Retargeting rules: map block history to the work required next.

Two rules are provided. ``rolling_window`` mirrors the deployed style of
difficulty adjustment that averages the ratio of chain work to elapsed time
over a trailing window of blocks and scales it to the target block time.
``ideal`` is the limiting rule that retargets instantly from the true
current hash rate; it exists so dynamics that assume blocks always arrive
on target can be exercised directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import DomainError

ROLLING_WINDOW = "rolling_window"
IDEAL = "ideal"


@dataclass(frozen=True)
class BlockRecord:
    """One mined block as seen by a retargeting rule.

    ``expected_hashes`` is the work the block was mined at (the chain-native
    difficulty proxy). ``solver_hash_rate`` is simulator bookkeeping and is
    never read by any rule.
    """

    height: int
    timestamp_s: float
    expected_hashes: float
    solver_hash_rate: float | None = None

    def __post_init__(self) -> None:
        if self.expected_hashes <= 0:
            raise DomainError("expected_hashes must be positive")


@dataclass(frozen=True)
class RetargetRule:
    """Configuration of a retargeting rule for one chain.

    ``genesis_expected_hashes`` seeds the chain before any block exists; the
    simulator defaults it to (initial hash rate x target time) so runs start
    with blocks already arriving on target.
    """

    kind: str
    target_time_s: float
    window_blocks: int = 144
    genesis_expected_hashes: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in (ROLLING_WINDOW, IDEAL):
            raise DomainError(f"unknown retarget rule kind {self.kind!r}")
        if self.target_time_s <= 0:
            raise DomainError("target_time_s must be positive")
        if self.window_blocks < 1:
            raise DomainError("window_blocks must be at least 1")
        if self.genesis_expected_hashes is not None and self.genesis_expected_hashes <= 0:
            raise DomainError("genesis_expected_hashes must be positive")


def _check_window(history: Sequence[BlockRecord], start: int) -> None:
    # Validate only the slice actually consumed; full histories are large.
    for i in range(max(start, 1), len(history)):
        if history[i].height != history[i - 1].height + 1:
            raise DomainError(
                f"heights must increase by 1 (index {i}: "
                f"{history[i - 1].height} -> {history[i].height})")
        if history[i].timestamp_s < history[i - 1].timestamp_s:
            raise DomainError(f"timestamps must be non-decreasing (index {i})")


def next_expected_hashes(rule: RetargetRule, history: Sequence[BlockRecord],
                         current_hash_rate: float | None = None) -> float:
    """Work required for the next block under ``rule``.

    The rolling rule averages work over elapsed time across the trailing
    window and multiplies by the target time; the record preceding the
    window supplies the elapsed-time fencepost, so a chain history should
    begin with its genesis record. A single-record history, or a window with
    zero elapsed time, carries the last work value forward.

    The ideal rule needs the true current hash rate and returns
    ``current_hash_rate * target_time_s``.
    """
    if rule.kind == IDEAL:
        if current_hash_rate is None or current_hash_rate <= 0:
            raise DomainError("ideal rule requires a positive current hash rate")
        return current_hash_rate * rule.target_time_s

    if not history:
        if rule.genesis_expected_hashes is None:
            raise DomainError("empty history and no genesis_expected_hashes configured")
        return rule.genesis_expected_hashes
    if len(history) == 1:
        return history[-1].expected_hashes

    n = min(rule.window_blocks, len(history) - 1)
    anchor = len(history) - 1 - n
    _check_window(history, anchor)
    work = 0.0
    for record in history[-n:]:
        work += record.expected_hashes
    elapsed = history[-1].timestamp_s - history[anchor].timestamp_s
    if elapsed <= 0:
        return history[-1].expected_hashes
    return work * rule.target_time_s / elapsed


def windowed_mean_block_time(rule: RetargetRule, history: Sequence[BlockRecord]) -> float:
    """Mean realized inter-block time over the rule's trailing window."""
    if len(history) < 2:
        raise DomainError("need at least two records to measure block times")
    n = min(rule.window_blocks, len(history) - 1)
    anchor = len(history) - 1 - n
    _check_window(history, anchor)
    return (history[-1].timestamp_s - history[anchor].timestamp_s) / n


def is_at_rest(rule: RetargetRule, history: Sequence[BlockRecord], tolerance: float) -> bool:
    """Whether blocks are arriving on target.

    For the rolling rule the trailing window's mean inter-block time must be
    within ``tolerance * target_time_s`` of the target; the window must be
    fully populated. The ideal rule is at rest by construction once any
    block exists.
    """
    if tolerance < 0:
        raise DomainError("tolerance must be non-negative")
    if rule.kind == IDEAL:
        if not history:
            raise DomainError("ideal rule needs at least one record")
        return True
    if len(history) - 1 < rule.window_blocks:
        raise DomainError(
            f"need {rule.window_blocks} inter-block gaps, have {len(history) - 1}")
    mean_dt = windowed_mean_block_time(rule, history)
    return abs(mean_dt - rule.target_time_s) <= tolerance * rule.target_time_s
