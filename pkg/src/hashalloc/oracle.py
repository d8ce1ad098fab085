"""Price-ratio oracle over a validated header chain.

A verifier on chain A keeps a light-client copy of chain B's headers,
validated by height continuity, hash linkage, and a proof-of-work check
against the target implied by each header's difficulty. Hash rates derived
from the two chains' difficulties invert the equilibrium allocation into an
estimate of the price ratio P_B / P_A, with no trusted feed involved.

Header digests are interpreted as big-endian 256-bit integers. The PoW rule
is the simplified constant-difficulty form: digest <= floor(2^256 /
(2^32 * difficulty)); real per-chain retargeting schedules are out of scope
and fixtures use a toy nonce search over sha256.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass

from .errors import DomainError, InputDataError

GENESIS_PREV = b"\x00" * 32
_MAX_DIGEST = 2 ** 256


class HeaderValidationError(DomainError):
    """A header failed one of the chain-extension rules."""


class HeightGap(HeaderValidationError):
    """Header height does not follow the tip height."""


class LinkMismatch(HeaderValidationError):
    """Header's previous-hash does not reference the tip."""


class InsufficientWork(HeaderValidationError):
    """Header digest exceeds the target implied by its difficulty."""


class UnknownHeader(DomainError):
    """A queried height is not present in the stored chain."""


class FutureBlock(DomainError):
    """A queried local height has not been produced yet."""


class NonpositiveRate(DomainError):
    """A hash-rate input to the estimator is not positive."""


@dataclass(frozen=True)
class Header:
    """One block header as seen by the light client."""

    height: int
    prev_hash: bytes
    self_hash: bytes
    difficulty: float
    timestamp_s: float

    def __post_init__(self) -> None:
        if len(self.prev_hash) != 32 or len(self.self_hash) != 32:
            raise DomainError("hashes must be 32 bytes")
        if self.difficulty <= 0:
            raise DomainError("difficulty must be positive")
        if self.self_hash == self.prev_hash:
            raise DomainError("self_hash must differ from prev_hash")


def target_from_difficulty(difficulty: float) -> int:
    """Largest digest value acceptable at the given difficulty.

    A difficulty-D block needs 2^32 * D expected hashes, so the target is
    floor(2^256 / (2^32 * D)) = floor(2^224 / D).
    """
    if difficulty <= 0:
        raise DomainError("difficulty must be positive")
    return int(2.0 ** 224 / difficulty)


def expected_hashes_from_difficulty(difficulty: float) -> float:
    """Expected number of hashes to solve one block at this difficulty."""
    if difficulty <= 0:
        raise DomainError("difficulty must be positive")
    return 2.0 ** 32 * difficulty


def hash_rate_from_difficulty(difficulty: float, target_time_s: float) -> float:
    """Hash rate sustaining this difficulty at the target block time:
    2^32 * D / T."""
    if target_time_s <= 0:
        raise DomainError("target block time must be positive")
    return expected_hashes_from_difficulty(difficulty) / target_time_s


class HeaderChain:
    """Ordered headers from genesis with per-height lookup.

    ``update`` enforces the three extension rules and names the violated
    one; ``extend_trusted`` checks structure only, for the verifier's own
    native chain where headers arrive from consensus, not from peers.
    """

    def __init__(self, genesis: Header):
        self._headers: list[Header] = [genesis]

    @property
    def genesis(self) -> Header:
        return self._headers[0]

    @property
    def tip(self) -> Header:
        return self._headers[-1]

    def __len__(self) -> int:
        return len(self._headers)

    def header_at(self, height: int) -> Header:
        base = self._headers[0].height
        index = height - base
        if index < 0 or index >= len(self._headers):
            raise UnknownHeader(f"no stored header at height {height}")
        return self._headers[index]

    def update(self, header: Header) -> None:
        """Append a foreign header if it extends the tip with valid work."""
        tip = self.tip
        if header.height != tip.height + 1:
            raise HeightGap(
                f"expected height {tip.height + 1}, got {header.height}")
        if header.prev_hash != tip.self_hash:
            raise LinkMismatch(
                f"prev_hash does not reference the tip at height {tip.height}")
        if int.from_bytes(header.self_hash, "big") > target_from_difficulty(header.difficulty):
            raise InsufficientWork(
                f"digest above target for difficulty {header.difficulty!r}")
        self._headers.append(header)

    def extend_trusted(self, header: Header) -> None:
        """Append a native-chain header, checking structure but not work."""
        tip = self.tip
        if header.height != tip.height + 1:
            raise HeightGap(
                f"expected height {tip.height + 1}, got {header.height}")
        if header.prev_hash != tip.self_hash:
            raise LinkMismatch(
                f"prev_hash does not reference the tip at height {tip.height}")
        self._headers.append(header)

    def replay(self) -> "HeaderChain":
        """Re-validate the stored headers from genesis; returns the rebuilt
        chain (raises if any stored header no longer validates)."""
        rebuilt = HeaderChain(self.genesis)
        for header in self._headers[1:]:
            rebuilt.update(header)
        return rebuilt


def estimate_price_ratio(rate_a: float, rate_b: float, coins_a: float,
                         coins_b: float, t_a: float, t_b: float) -> float:
    """Invert the equilibrium allocation into a price-ratio estimate.

    Given observed hash rates, the allocation fraction on chain A equals
    its equilibrium value only for one price ratio:

        P_B/P_A = (c_A/(c_B*T_A)) * (T_B*(H_A+H_B)/H_A - T_B + T_A) - c_A/c_B
    """
    if rate_a <= 0:
        raise NonpositiveRate("chain A hash rate must be positive")
    if rate_b < 0:
        raise NonpositiveRate("chain B hash rate must be non-negative")
    if coins_a <= 0 or coins_b <= 0:
        raise DomainError("coin issuance must be positive")
    if t_a <= 0 or t_b <= 0:
        raise DomainError("target block times must be positive")
    lead = coins_a / (coins_b * t_a)
    return lead * (t_b * (rate_a + rate_b) / rate_a - t_b + t_a) - coins_a / coins_b


class PriceOracle:
    """Estimates P_B / P_A from header pairs of the two chains.

    The oracle runs on chain A: its own headers are recorded trusted while
    chain B headers pass full validation through ``update``.
    """

    def __init__(self, local: HeaderChain, foreign: HeaderChain,
                 coins_a: float, coins_b: float, t_a: float, t_b: float):
        self.local = local
        self.foreign = foreign
        self.coins_a = coins_a
        self.coins_b = coins_b
        self.t_a = t_a
        self.t_b = t_b

    def update(self, header: Header) -> None:
        """Validate and store a new chain-B header."""
        self.foreign.update(header)

    def record_local(self, header: Header) -> None:
        self.local.extend_trusted(header)

    def query(self, height_a: int, height_b: int) -> float:
        """Price-ratio estimate when the chains stood at these heights."""
        if height_a > self.local.tip.height:
            raise FutureBlock(
                f"local chain is at height {self.local.tip.height}, "
                f"height {height_a} not yet produced")
        local = self.local.header_at(height_a)
        foreign = self.foreign.header_at(height_b)
        rate_a = hash_rate_from_difficulty(local.difficulty, self.t_a)
        rate_b = hash_rate_from_difficulty(foreign.difficulty, self.t_b)
        return estimate_price_ratio(rate_a, rate_b, self.coins_a,
                                    self.coins_b, self.t_a, self.t_b)


# ---------------------------------------------------------------------------
# Toy proof-of-work fixtures

def _digest(height: int, prev_hash: bytes, difficulty: float,
            timestamp_s: float, nonce: int) -> bytes:
    payload = struct.pack(">q32sddq", height, prev_hash, difficulty,
                          timestamp_s, nonce)
    return hashlib.sha256(payload).digest()


def mine_header(height: int, prev_hash: bytes, difficulty: float,
                timestamp_s: float, max_nonce: int = 1 << 32) -> Header:
    """Search nonces until the digest meets the difficulty target.

    Keep fixture difficulties tiny (around 1e-7, a few hundred expected
    sha256 evaluations); real difficulties are unmineable here by design.
    """
    target = target_from_difficulty(difficulty)
    for nonce in range(max_nonce):
        digest = _digest(height, prev_hash, difficulty, timestamp_s, nonce)
        if int.from_bytes(digest, "big") <= target and digest != prev_hash:
            return Header(height, prev_hash, digest, difficulty, timestamp_s)
    raise DomainError(f"no nonce below {max_nonce} met difficulty {difficulty!r}")


def mine_chain(length: int, difficulty: float, start_height: int = 0,
               t0: float = 0.0, block_time_s: float = 600.0) -> list[Header]:
    """Genesis plus ``length`` mined successors at a constant difficulty."""
    headers = [mine_header(start_height, GENESIS_PREV, difficulty, t0)]
    for i in range(1, length + 1):
        headers.append(mine_header(start_height + i, headers[-1].self_hash,
                                   difficulty, t0 + i * block_time_s))
    return headers


def write_headers(path: str, headers: list[Header]) -> None:
    """One header per line: height,prev_hash,self_hash,difficulty,timestamp.

    Hashes are 64 hex characters, big-endian byte order; difficulty and
    timestamp are decimal (repr round-trip).
    """
    with open(path, "w") as fh:
        fh.write("# height,prev_hash,self_hash,difficulty,timestamp_s\n")
        for h in headers:
            fh.write(f"{h.height},{h.prev_hash.hex()},{h.self_hash.hex()},"
                     f"{h.difficulty!r},{h.timestamp_s!r}\n")


def read_headers(path: str) -> list[Header]:
    headers = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            if len(parts) != 5:
                raise InputDataError(f"{path}: line {lineno}: expected 5 fields")
            try:
                headers.append(Header(
                    height=int(parts[0]),
                    prev_hash=bytes.fromhex(parts[1]),
                    self_hash=bytes.fromhex(parts[2]),
                    difficulty=float(parts[3]),
                    timestamp_s=float(parts[4]),
                ))
            except (ValueError, DomainError) as exc:
                raise InputDataError(f"{path}: line {lineno}: {exc}") from exc
    if not headers:
        raise InputDataError(f"{path}: no headers found")
    return headers


def load_chain(path: str, validate: bool = True) -> HeaderChain:
    """Build a chain from a fixture file, replaying full validation unless
    the file describes the verifier's own trusted chain."""
    headers = read_headers(path)
    chain = HeaderChain(headers[0])
    for header in headers[1:]:
        if validate:
            chain.update(header)
        else:
            chain.extend_trusted(header)
    return chain
