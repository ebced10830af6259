"""Hash-chained block store with private (trust-list) and public (PoW) modes.

Blocks are hashed as SHA-256 over compact, key-sorted JSON of
``(index, timestamp, prev_hash, nonce, payload)``. Timestamps come from a
simulated integer clock so identical inputs replay to identical chains.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterator, NamedTuple

from . import kernels

GENESIS_PREV_HASH = "0" * 64
MAX_DIFFICULTY = 16

_HEX64 = re.compile(r"[0-9a-f]{64}")


class LedgerError(Exception):
    pass


class MiningError(LedgerError):
    pass


class TamperedChainError(LedgerError):
    pass


class Mode(str, Enum):
    PRIVATE = "Private"
    PUBLIC = "Public"


class TxKind(str, Enum):
    ADMISSION_REQUEST = "AdmissionRequest"
    ADMISSION_DECISION = "AdmissionDecision"
    RSSI_REPORT = "RssiReport"
    POSITION_RECORD = "PositionRecord"


REASONS = ("Trusted", "UntrustedIdentity", "OutOfBounds")

_BODY_KEYS = {
    TxKind.ADMISSION_REQUEST: {"rssi"},
    TxKind.ADMISSION_DECISION: {"granted", "reason", "x", "y"},
    TxKind.RSSI_REPORT: {"rssi"},
    TxKind.POSITION_RECORD: {"x", "y"},
}

GENESIS_BODY = {"genesis": "true"}


def fmt_decimal(value: float) -> str:
    """Six-decimal string used for every numeric body value."""
    text = f"{value:.6f}"
    return "0.000000" if text == "-0.000000" else text


def _is_decimal(text) -> bool:
    if not isinstance(text, str):
        return False
    try:
        float(text)
    except ValueError:
        return False
    return True


@dataclass
class Transaction:
    kind: TxKind
    device_id: str
    body: dict

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "device_id": self.device_id, "body": self.body}

    @classmethod
    def from_dict(cls, data: dict) -> Transaction:
        if not isinstance(data, dict) or set(data) != {"kind", "device_id", "body"}:
            raise LedgerError("payload must have exactly the keys kind, device_id, body")
        try:
            kind = TxKind(data["kind"])
        except ValueError:
            raise LedgerError(f"unknown transaction kind {data['kind']!r}") from None
        if not isinstance(data["device_id"], str) or not isinstance(data["body"], dict):
            raise LedgerError("device_id must be a string and body an object")
        return cls(kind, data["device_id"], data["body"])


def body_errors(tx: Transaction, *, genesis: bool = False) -> list[str]:
    """Schema violations of ``tx.body`` for its kind (empty list if valid)."""
    body = tx.body
    if genesis:
        if tx.kind is TxKind.ADMISSION_DECISION and body == GENESIS_BODY:
            return []
        return ["genesis payload must be AdmissionDecision {'genesis': 'true'}"]
    expected = _BODY_KEYS[tx.kind]
    if set(body) != expected:
        return [f"{tx.kind.value} body keys must be {sorted(expected)}, got {sorted(body)}"]
    errors = []
    if "rssi" in expected:
        rssi = body["rssi"]
        if not isinstance(rssi, dict) or not all(
            isinstance(k, str) and _is_decimal(v) for k, v in rssi.items()
        ):
            errors.append("rssi must map anchor ids to decimal strings")
    if tx.kind is TxKind.POSITION_RECORD:
        if not (_is_decimal(body["x"]) and _is_decimal(body["y"])):
            errors.append("x and y must be decimal strings")
    if tx.kind is TxKind.ADMISSION_DECISION:
        if body["granted"] not in ("true", "false"):
            errors.append("granted must be 'true' or 'false'")
        if body["reason"] not in REASONS:
            errors.append(f"reason must be one of {REASONS}")
        has_x, has_y = body["x"] != "", body["y"] != ""
        if has_x != has_y or (has_x and not (_is_decimal(body["x"]) and _is_decimal(body["y"]))):
            errors.append("x and y must both be decimal strings or both empty")
    return errors


def make_transaction(kind: TxKind | str, device_id: str, body: dict) -> Transaction:
    tx = Transaction(TxKind(kind), device_id, body)
    problems = body_errors(tx)
    if problems:
        raise LedgerError("; ".join(problems))
    return tx


@dataclass
class Block:
    index: int
    timestamp: int
    prev_hash: str
    nonce: int
    payload: Transaction
    hash: str

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "timestamp": self.timestamp,
            "prev_hash": self.prev_hash,
            "nonce": self.nonce,
            "payload": self.payload.to_dict(),
            "hash": self.hash,
        }

    @classmethod
    def from_dict(cls, data: dict) -> Block:
        keys = ["index", "timestamp", "prev_hash", "nonce", "payload", "hash"]
        if not isinstance(data, dict) or set(data) != set(keys):
            raise LedgerError(f"block must have exactly the keys {keys}")
        for name in ("index", "timestamp", "nonce"):
            value = data[name]
            if not isinstance(value, int) or isinstance(value, bool) or value < 0:
                raise LedgerError(f"block {name} must be a non-negative integer")
        for name in ("prev_hash", "hash"):
            if not isinstance(data[name], str):
                raise LedgerError(f"block {name} must be a string")
        return cls(
            data["index"],
            data["timestamp"],
            data["prev_hash"],
            data["nonce"],
            Transaction.from_dict(data["payload"]),
            data["hash"],
        )


def _compact(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def canonical_bytes(index: int, timestamp: int, prev_hash: str, nonce: int, payload: Transaction) -> bytes:
    return _compact(
        {
            "index": index,
            "timestamp": timestamp,
            "prev_hash": prev_hash,
            "nonce": nonce,
            "payload": payload.to_dict(),
        }
    ).encode()


def canonical_split(index: int, timestamp: int, prev_hash: str, payload: Transaction) -> tuple[bytes, bytes]:
    """Bytes before and after the decimal nonce in ``canonical_bytes``.

    Sorted keys put ``nonce`` second, so the serialization is
    ``prefix + str(nonce) + suffix``; the mining kernels rely on this.
    """
    prefix = '{"index":%s,"nonce":' % _compact(index)
    suffix = ',"payload":%s,"prev_hash":%s,"timestamp":%s}' % (
        _compact(payload.to_dict()),
        _compact(prev_hash),
        _compact(timestamp),
    )
    return prefix.encode(), suffix.encode()


def block_digest(index: int, timestamp: int, prev_hash: str, nonce: int, payload: Transaction) -> str:
    return hashlib.sha256(canonical_bytes(index, timestamp, prev_hash, nonce, payload)).hexdigest()


def meets_difficulty(digest: str, difficulty: int) -> bool:
    return digest.startswith("0" * difficulty)


def find_nonce(index: int, timestamp: int, prev_hash: str, payload: Transaction, difficulty: int) -> tuple[int, str]:
    """Smallest nonce (searched from 0 upward) meeting ``difficulty``.

    Attempts used equal ``nonce + 1``. Raises MiningError after
    ``16 ** (difficulty + 2)`` attempts.
    """
    _check_difficulty(difficulty)
    prefix, suffix = canonical_split(index, timestamp, prev_hash, payload)
    found = kernels.mine_nonce(prefix, suffix, difficulty, 16 ** (difficulty + 2))
    if found is None:
        raise MiningError(f"no nonce found within 16**{difficulty + 2} attempts")
    return found


def _check_difficulty(difficulty: int) -> None:
    if not 0 <= difficulty <= MAX_DIFFICULTY:
        raise LedgerError(f"difficulty out of range [0, {MAX_DIFFICULTY}]: {difficulty}")


@dataclass(frozen=True)
class ChainConfig:
    mode: Mode = Mode.PRIVATE
    difficulty: int = 0

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        _check_difficulty(self.difficulty)


class SimClock:
    """Monotone integer clock; ``tick`` returns the next timestamp."""

    def __init__(self, now: int = 0):
        self.now = now

    def tick(self) -> int:
        self.now += 1
        return self.now


Contract = Callable[[Transaction], "Transaction | None"]


class Verification(NamedTuple):
    ok: bool
    first_bad_index: int | None


@dataclass
class Chain:
    config: ChainConfig
    blocks: list[Block] = field(default_factory=list)
    clock: SimClock = field(default_factory=SimClock)
    contracts: dict[TxKind, Contract] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.blocks)

    def __iter__(self) -> Iterator[Block]:
        return iter(self.blocks)

    def __getitem__(self, i: int) -> Block:
        return self.blocks[i]

    @property
    def head(self) -> Block:
        return self.blocks[-1]

    def append(self, payload: Transaction) -> Block:
        """Append through the mode's gate: plain append or mining."""
        if self.config.mode is Mode.PRIVATE:
            return append_private(self, payload)
        return mine_block(self, payload)


def genesis_block() -> Block:
    payload = Transaction(TxKind.ADMISSION_DECISION, "", dict(GENESIS_BODY))
    digest = block_digest(0, 0, GENESIS_PREV_HASH, 0, payload)
    return Block(0, 0, GENESIS_PREV_HASH, 0, payload, digest)


def new_chain(config: ChainConfig | None = None, clock: SimClock | None = None) -> Chain:
    chain = Chain(config or ChainConfig(), clock=clock or SimClock())
    chain.blocks.append(genesis_block())
    return chain


def _check_payload(payload: Transaction) -> None:
    problems = body_errors(payload)
    if problems:
        raise LedgerError("invalid payload: " + "; ".join(problems))


def _seal(chain: Chain, payload: Transaction, difficulty: int | None) -> Block:
    index = chain.head.index + 1
    timestamp = chain.clock.tick()
    prev = chain.head.hash
    if difficulty is None:
        nonce, digest = 0, block_digest(index, timestamp, prev, 0, payload)
    else:
        nonce, digest = find_nonce(index, timestamp, prev, payload, difficulty)
    return Block(index, timestamp, prev, nonce, payload, digest)


def _commit(chain: Chain, payload: Transaction, difficulty: int | None) -> Block:
    _check_payload(payload)
    block = _seal(chain, payload, difficulty)
    chain.blocks.append(block)
    handler = chain.contracts.get(payload.kind)
    if handler is not None:
        follow_up = handler(payload)
        if follow_up is not None:
            # follow-ups are sealed directly: contracts never re-trigger
            _check_payload(follow_up)
            chain.blocks.append(_seal(chain, follow_up, difficulty))
    return block


def append_private(chain: Chain, payload: Transaction) -> Block:
    if chain.config.mode is not Mode.PRIVATE:
        raise LedgerError("append_private requires a Private chain")
    return _commit(chain, payload, None)


def mine_block(chain: Chain, payload: Transaction, difficulty: int | None = None) -> Block:
    """Mine ``payload`` onto a Public chain and append it.

    ``difficulty`` defaults to the chain's configured difficulty and may
    not be lower than it.
    """
    if chain.config.mode is not Mode.PUBLIC:
        raise LedgerError("mine_block requires a Public chain")
    if difficulty is None:
        difficulty = chain.config.difficulty
    _check_difficulty(difficulty)
    if difficulty < chain.config.difficulty:
        raise LedgerError(
            f"difficulty {difficulty} is below the chain's {chain.config.difficulty}"
        )
    return _commit(chain, payload, difficulty)


def register_contract(chain: Chain, trigger_kind: TxKind | str, handler: Contract) -> None:
    kind = TxKind(trigger_kind)
    if kind in chain.contracts:
        raise LedgerError(f"a contract is already registered for {kind.value}")
    chain.contracts[kind] = handler


def verify_block(block: Block, prev: Block | None, difficulty: int = 0) -> bool:
    """Check one block against its predecessor (``None`` for genesis)."""
    if prev is None:
        if block.index != 0 or block.prev_hash != GENESIS_PREV_HASH:
            return False
    elif block.index != prev.index + 1 or block.prev_hash != prev.hash:
        return False
    if not _HEX64.fullmatch(block.hash):
        return False
    if block_digest(block.index, block.timestamp, block.prev_hash, block.nonce, block.payload) != block.hash:
        return False
    if body_errors(block.payload, genesis=prev is None):
        return False
    return prev is None or meets_difficulty(block.hash, difficulty)


def verify_chain(chain: Chain) -> Verification:
    difficulty = chain.config.difficulty if chain.config.mode is Mode.PUBLIC else 0
    prev = None
    for i, block in enumerate(chain.blocks):
        if block.index != i or not verify_block(block, prev, difficulty):
            return Verification(False, i)
        prev = block
    if not chain.blocks:
        return Verification(False, 0)
    return Verification(True, None)


def dump_chain(chain: Chain) -> str:
    return json.dumps([b.to_dict() for b in chain.blocks], indent=2) + "\n"


def load_chain(text: str, config: ChainConfig | None = None) -> Chain:
    """Parse a chain dump. Structure is checked here; integrity is not."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise LedgerError(f"chain dump is not valid JSON (line {exc.lineno}): {exc.msg}") from None
    if not isinstance(data, list):
        raise LedgerError("chain dump must be a JSON array of blocks")
    blocks = []
    for i, item in enumerate(data):
        try:
            blocks.append(Block.from_dict(item))
        except LedgerError as exc:
            raise LedgerError(f"block {i}: {exc}") from None
    now = max((b.timestamp for b in blocks), default=0)
    return Chain(config or ChainConfig(), blocks=blocks, clock=SimClock(now))
