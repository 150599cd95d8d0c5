"""Single-chain ledger simulation.

Two of these make up a world: the flat-fee proof-of-authority data chain and
the variable-gas governance chain. A chain is a single-writer state machine;
transactions queue in a FIFO mempool and apply when a block is produced on an
explicit tick. Command payloads are interpreted by a pluggable executor so
this module stays independent of the wallet/asset/governance layers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol

from .canonical import ZERO_DIGEST, canonical_json, digest_of
from .errors import ConfigError, DomainError, NonceError
from .keys import Address, KeyedHashAuthenticator

# Every transaction kind the simulator can include in a block. Variable-gas
# chains must price all of them.
ACTION_KINDS = (
    "createWallet",
    "setMultisigName",
    "addOwner",
    "removeOwner",
    "changeRequirement",
    "mint",
    "transfer",
    "withdraw",
    "registerAsset",
    "updateAssetState",
    "updatePolicy",
    "confirm",
    "revoke",
    "bridgeLock",
    "bridgeMint",
    "bridgeBurn",
    "bridgeRelease",
    "applyPolicy",
    "noop",
)

# Rough relative weights, in gas units, for each transaction kind.
DEFAULT_GAS_TABLE = {
    "createWallet": 1200,
    "setMultisigName": 60,
    "addOwner": 90,
    "removeOwner": 90,
    "changeRequirement": 80,
    "mint": 70,
    "transfer": 65,
    "withdraw": 65,
    "registerAsset": 110,
    "updateAssetState": 95,
    "updatePolicy": 85,
    "confirm": 50,
    "revoke": 45,
    "bridgeLock": 75,
    "bridgeMint": 75,
    "bridgeBurn": 75,
    "bridgeRelease": 75,
    "applyPolicy": 85,
    "noop": 21,
}

SUCCESS = "success"
REJECTED = "rejected"


@dataclass(frozen=True)
class FlatFee:
    """Fixed fee per transaction regardless of action or height."""

    fee_per_tx: int

    def validate(self) -> None:
        if self.fee_per_tx < 0:
            raise ConfigError("flat fee must be >= 0")

    def to_json(self) -> dict:
        return {"flat": self.fee_per_tx}


@dataclass(frozen=True)
class VariableGas:
    """Per-height gas price schedule times a per-action gas table.

    The schedule is indexed by block height and clamps at its last entry for
    heights beyond its length.
    """

    schedule: tuple[int, ...]
    gas_table: dict[str, int] = field(default_factory=lambda: dict(DEFAULT_GAS_TABLE))

    def validate(self) -> None:
        if not self.schedule:
            raise ConfigError("gas price schedule must be non-empty")
        if any(price < 1 for price in self.schedule):
            raise ConfigError("every gas price must be >= 1")
        missing = [kind for kind in ACTION_KINDS if kind not in self.gas_table]
        if missing:
            raise ConfigError(f"gas table missing action kinds: {missing}")
        if any(units < 0 for units in self.gas_table.values()):
            raise ConfigError("gas units must be >= 0")

    def price_at(self, height: int) -> int:
        return self.schedule[min(height, len(self.schedule) - 1)]

    def to_json(self) -> dict:
        return {"variable_gas": {"schedule": list(self.schedule), "gas_table": dict(self.gas_table)}}


FeeModel = FlatFee | VariableGas


def fee_model_from_json(spec: dict) -> FeeModel:
    if "flat" in spec:
        return FlatFee(fee_per_tx=int(spec["flat"]))
    if "variable_gas" in spec:
        body = spec["variable_gas"]
        table = body.get("gas_table")
        if table is None:
            return VariableGas(schedule=tuple(int(p) for p in body["schedule"]))
        return VariableGas(
            schedule=tuple(int(p) for p in body["schedule"]),
            gas_table={k: int(v) for k, v in table.items()},
        )
    raise ConfigError(f"unknown fee model: {spec!r}")


@dataclass(frozen=True)
class ChainConfig:
    chain_id: int
    label: str
    authorities: tuple[Address, ...]
    fee_model: FeeModel
    block_size_limit: int = 100

    def validate(self) -> None:
        if self.label not in ("data", "gov"):
            raise ConfigError(f"chain label must be 'data' or 'gov', got {self.label!r}")
        if not self.authorities:
            raise ConfigError("proof-of-authority chain needs a non-empty authority set")
        if self.block_size_limit < 1:
            raise ConfigError("block size limit must be >= 1")
        self.fee_model.validate()

    def to_json(self) -> dict:
        return {
            "chain_id": self.chain_id,
            "label": self.label,
            "authorities": [a.hex for a in self.authorities],
            "fee_model": self.fee_model.to_json(),
            "block_size_limit": self.block_size_limit,
        }


@dataclass(frozen=True)
class SignedTransaction:
    sender: str  # address hex
    nonce: int
    payload: dict
    signature: str

    def signing_message(self) -> bytes:
        return canonical_json({"sender": self.sender, "nonce": self.nonce, "payload": self.payload})

    @property
    def digest(self) -> str:
        return digest_of(
            {"sender": self.sender, "nonce": self.nonce, "payload": self.payload, "signature": self.signature}
        )


@dataclass
class Receipt:
    tx_digest: str
    block_height: int
    status: str  # success | rejected
    fee_paid: int
    gas_used: int
    action_kind: str
    error_code: str | None = None
    reason: str | None = None
    result: dict | None = None  # command outputs, e.g. created wallet address

    def to_json(self) -> dict:
        return {
            "tx_digest": self.tx_digest,
            "block_height": self.block_height,
            "status": self.status,
            "fee_paid": self.fee_paid,
            "gas_used": self.gas_used,
            "action_kind": self.action_kind,
            "error_code": self.error_code,
            "reason": self.reason,
            "result": self.result,
        }


@dataclass(frozen=True)
class Block:
    height: int
    parent_digest: str
    producer: str  # address hex
    transactions: tuple[SignedTransaction, ...]
    state_digest: str

    @property
    def block_hash(self) -> str:
        return digest_of(
            {
                "height": self.height,
                "parent": self.parent_digest,
                "producer": self.producer,
                "txs": [tx.digest for tx in self.transactions],
                "state": self.state_digest,
            }
        )


class CommandExecutor(Protocol):
    """Interprets transaction payloads against chain-hosted modules."""

    def action_kind(self, payload: dict) -> str: ...

    def apply(self, chain: "Chain", tx: SignedTransaction, height: int) -> dict | None: ...

    def state_view(self) -> dict: ...


class NullExecutor:
    """No-op executor used when a chain carries plain value transactions only."""

    def action_kind(self, payload: dict) -> str:
        return payload.get("kind", "noop")

    def apply(self, chain: "Chain", tx: SignedTransaction, height: int) -> dict | None:
        if "fail" in tx.payload:
            raise ConfigError(str(tx.payload["fail"]))
        return None

    def state_view(self) -> dict:
        return {}


class Chain:
    """One deterministic proof-of-authority ledger.

    All mutation happens through `submit_signed` + `produce_block`; reads are
    plain attribute access on committed state.
    """

    def __init__(
        self,
        config: ChainConfig,
        authenticator: KeyedHashAuthenticator,
        executor: CommandExecutor | None = None,
    ):
        config.validate()
        self.config = config
        self.authenticator = authenticator
        self.executor: CommandExecutor = executor if executor is not None else NullExecutor()
        self.mempool: list[SignedTransaction] = []
        self.balances: dict[str, dict[str, int]] = {}  # token -> holder hex -> amount
        self.minted: dict[str, int] = {}
        self.burned: dict[str, int] = {}
        self.names: dict[str, str] = {}  # address hex -> display name
        self._next_nonce: dict[str, int] = {}
        self.receipts: dict[str, Receipt] = {}
        self.receipts_by_height: dict[int, list[Receipt]] = {}
        self.blocks: list[Block] = []
        self._seal_genesis()

    # ------------------------------------------------------------------
    # block production
    # ------------------------------------------------------------------

    def _seal_genesis(self) -> None:
        genesis = Block(
            height=0,
            parent_digest=ZERO_DIGEST,
            producer=self.config.authorities[0].hex,
            transactions=(),
            state_digest=self.state_digest(),
        )
        self.blocks.append(genesis)
        self.receipts_by_height[0] = []

    @property
    def height(self) -> int:
        return self.blocks[-1].height

    @property
    def head(self) -> Block:
        return self.blocks[-1]

    def next_nonce(self, sender_hex: str) -> int:
        return self._next_nonce.get(sender_hex, 0) + 1

    def submit_signed(self, tx: SignedTransaction) -> str:
        """Admit a transaction to the mempool; returns its digest."""
        self.authenticator.verify(tx.sender, tx.signing_message(), tx.signature)
        expected = self.next_nonce(tx.sender)
        if tx.nonce != expected:
            raise NonceError(f"expected nonce {expected} for {tx.sender}, got {tx.nonce}")
        kind = self.executor.action_kind(tx.payload)
        if isinstance(self.config.fee_model, VariableGas) and kind not in self.config.fee_model.gas_table:
            raise ConfigError(f"no gas entry for action kind {kind!r}")
        self._next_nonce[tx.sender] = tx.nonce
        self.mempool.append(tx)
        return tx.digest

    def produce_block(self) -> Block:
        """Apply up to block_size_limit mempool transactions in FIFO order.

        Individual transaction failures become rejected receipts and never
        abort the block.
        """
        count = min(len(self.mempool), self.config.block_size_limit)
        txs = tuple(self.mempool[:count])
        del self.mempool[:count]
        height = self.height + 1
        producer = self.config.authorities[height % len(self.config.authorities)].hex
        receipts: list[Receipt] = []
        for tx in txs:
            kind = self.executor.action_kind(tx.payload)
            gas = self.gas_for(kind)
            fee = self.fee_for(kind, height)
            try:
                result = self.executor.apply(self, tx, height)
                receipt = Receipt(tx.digest, height, SUCCESS, fee, gas, kind, result=result)
            except DomainError as err:
                receipt = Receipt(tx.digest, height, REJECTED, fee, gas, kind, error_code=err.code, reason=str(err))
            receipts.append(receipt)
            self.receipts[tx.digest] = receipt
        block = Block(
            height=height,
            parent_digest=self.head.block_hash,
            producer=producer,
            transactions=txs,
            state_digest=self.state_digest(),
        )
        self.blocks.append(block)
        self.receipts_by_height[height] = receipts
        self._check_conservation()
        return block

    def _check_conservation(self) -> None:
        for token, holders in self.balances.items():
            total = sum(holders.values())
            expected = self.minted.get(token, 0) - self.burned.get(token, 0)
            if total != expected:
                raise ConfigError(f"token {token} conservation broken: held {total}, minted-burned {expected}")

    # ------------------------------------------------------------------
    # fees
    # ------------------------------------------------------------------

    def gas_for(self, action_kind: str) -> int:
        model = self.config.fee_model
        if isinstance(model, FlatFee):
            return 0
        if action_kind not in model.gas_table:
            raise ConfigError(f"no gas entry for action kind {action_kind!r}")
        return model.gas_table[action_kind]

    def fee_for(self, action_kind: str, height: int) -> int:
        model = self.config.fee_model
        if isinstance(model, FlatFee):
            return model.fee_per_tx
        return self.gas_for(action_kind) * model.price_at(height)

    # ------------------------------------------------------------------
    # token ledger (mutations are executor/bridge territory)
    # ------------------------------------------------------------------

    def balance_of(self, token: str, holder: str | Address) -> int:
        holder_hex = holder.hex if isinstance(holder, Address) else holder
        if token not in self.balances:
            raise ConfigError(f"unknown token {token!r} on chain {self.config.label}")
        return self.balances[token].get(holder_hex, 0)

    def knows_token(self, token: str) -> bool:
        return token in self.balances

    def mint(self, token: str, to_hex: str, amount: int) -> None:
        if amount <= 0:
            raise ConfigError("mint amount must be > 0")
        holders = self.balances.setdefault(token, {})
        holders[to_hex] = holders.get(to_hex, 0) + amount
        self.minted[token] = self.minted.get(token, 0) + amount

    def burn(self, token: str, holder_hex: str, amount: int) -> None:
        if amount <= 0:
            raise ConfigError("burn amount must be > 0")
        if self.balance_of(token, holder_hex) < amount:
            raise ConfigError(f"cannot burn {amount} {token} from {holder_hex}")
        self.balances[token][holder_hex] -= amount
        self.burned[token] = self.burned.get(token, 0) + amount

    def move(self, token: str, frm_hex: str, to_hex: str, amount: int) -> None:
        if amount <= 0:
            raise ConfigError("transfer amount must be > 0")
        if self.balance_of(token, frm_hex) < amount:
            raise ConfigError(f"insufficient {token} balance at {frm_hex}")
        holders = self.balances[token]
        holders[frm_hex] -= amount
        holders[to_hex] = holders.get(to_hex, 0) + amount

    def set_name(self, address_hex: str, name: str) -> None:
        self.names[address_hex] = name

    def name_of(self, address_hex: str) -> str:
        return self.names.get(address_hex, "")

    # ------------------------------------------------------------------
    # state hashing
    # ------------------------------------------------------------------

    def state(self) -> dict:
        """Committed chain state in canonical-serializable form.

        Chain position (height, parent) is deliberately excluded: it lives in
        the block hash, so an empty block reproduces its parent's state digest.
        """
        return {
            "chain_id": self.config.chain_id,
            "label": self.config.label,
            "nonces": dict(self._next_nonce),
            "balances": {t: dict(h) for t, h in self.balances.items()},
            "minted": dict(self.minted),
            "burned": dict(self.burned),
            "names": dict(self.names),
            "modules": self.executor.state_view(),
        }

    def state_digest(self) -> str:
        return digest_of(self.state())

    def all_receipts(self) -> list[Receipt]:
        out: list[Receipt] = []
        for height in sorted(self.receipts_by_height):
            out.extend(self.receipts_by_height[height])
        return out
